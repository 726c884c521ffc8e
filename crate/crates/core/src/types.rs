//! Raster containers and the evaluation units built from them.
//!
//! Samples are stored as `f32` in band-sequential order (row-major inside each
//! band, bands concatenated). Computations convert bands to [`Grid`], a
//! single-band `f64` raster.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::approx_eq;

/// Single-band `f64` raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMeta(format!("empty grid {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::PayloadSizeMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "empty grid");
        Self { width, height, data: alloc::vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "empty grid");
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self { width, height, data }
    }

    pub fn from_f32(width: usize, height: usize, samples: &[f32]) -> Result<Self> {
        Self::new(width, height, samples.iter().map(|&v| v as f64).collect())
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Detector a band was acquired by, kept when VNIR and SWIR are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Detector {
    Vnir,
    Swir,
}

/// Geometry and spectral metadata shared by every raster kind.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMeta {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    /// Ground-sample distance in meters per pixel.
    pub gsd: f64,
    /// Band centers in nanometers, one per band.
    pub wavelengths: Vec<f64>,
    pub nodata: Option<f64>,
    /// Source detector of each band, when known.
    pub sources: Option<Vec<Detector>>,
}

impl RasterMeta {
    pub fn new(width: usize, height: usize, gsd: f64, wavelengths: Vec<f64>) -> Result<Self> {
        let meta = Self {
            width,
            height,
            bands: wavelengths.len(),
            gsd,
            wavelengths,
            nodata: None,
            sources: None,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidMeta(format!(
                "dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if self.bands == 0 {
            return Err(Error::InvalidMeta("at least one band required".into()));
        }
        if !(self.gsd.is_finite() && self.gsd > 0.0) {
            return Err(Error::InvalidMeta(format!("gsd must be positive, got {}", self.gsd)));
        }
        if self.wavelengths.len() != self.bands {
            return Err(Error::InvalidMeta(format!(
                "{} wavelengths for {} bands",
                self.wavelengths.len(),
                self.bands
            )));
        }
        if self.wavelengths.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidMeta("non-finite wavelength".into()));
        }
        if let Some(pos) = self.wavelengths.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMeta(format!(
                "wavelengths not strictly increasing at band {}",
                pos + 1
            )));
        }
        if let Some(sources) = &self.sources {
            if sources.len() != self.bands {
                return Err(Error::InvalidMeta(format!(
                    "{} band sources for {} bands",
                    sources.len(),
                    self.bands
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn sample_count(&self) -> usize {
        self.pixels() * self.bands
    }

    /// Same grid (dimensions and ground-sample distance).
    pub fn same_grid(&self, other: &RasterMeta) -> bool {
        self.width == other.width && self.height == other.height && approx_eq(self.gsd, other.gsd)
    }

    /// Copy with a new pixel grid, keeping spectral metadata.
    pub fn with_grid(&self, width: usize, height: usize, gsd: f64) -> RasterMeta {
        RasterMeta { width, height, gsd, ..self.clone() }
    }

    /// Index of the band nearest to `target_nm`; ties go to the lower index.
    pub fn band_at_wavelength(&self, target_nm: f64) -> usize {
        band_at_wavelength(&self.wavelengths, target_nm)
    }
}

/// Index of the wavelength nearest to `target_nm`; ties go to the lower index.
///
/// Panics on an empty slice.
pub fn band_at_wavelength(wavelengths: &[f64], target_nm: f64) -> usize {
    assert!(!wavelengths.is_empty(), "no bands");
    let mut best = 0;
    let mut best_dist = (wavelengths[0] - target_nm).abs();
    for (i, w) in wavelengths.iter().enumerate().skip(1) {
        let d = (w - target_nm).abs();
        if d < best_dist {
            best = i;
            best_dist = d;
        }
    }
    best
}

fn check_payload(meta: &RasterMeta, actual: usize) -> Result<()> {
    let expected = meta.sample_count();
    if expected != actual {
        return Err(Error::PayloadSizeMismatch { expected, actual });
    }
    Ok(())
}

fn check_finite(samples: &[f32], pixels: usize) -> Result<()> {
    match samples.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite { band: i / pixels, index: i % pixels }),
        None => Ok(()),
    }
}

fn crop_bsq<T: Copy>(
    samples: &[T],
    meta: &RasterMeta,
    x: usize,
    y: usize,
    w: usize,
    h: usize,
) -> Result<Vec<T>> {
    if w == 0 || h == 0 || x + w > meta.width || y + h > meta.height {
        return Err(Error::InvalidArgument(format!(
            "window {w}x{h} at ({x},{y}) outside {}x{}",
            meta.width, meta.height
        )));
    }
    let mut out = Vec::with_capacity(w * h * meta.bands);
    for band in samples.chunks_exact(meta.pixels()) {
        for row in y..y + h {
            let start = row * meta.width + x;
            out.extend_from_slice(&band[start..start + w]);
        }
    }
    Ok(out)
}

/// Multi-band reflectance cube (`HS`, `HS↓` or a fused result).
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    meta: RasterMeta,
    samples: Vec<f32>,
}

impl HyperCube {
    pub fn new(meta: RasterMeta, samples: Vec<f32>) -> Result<Self> {
        meta.validate()?;
        check_payload(&meta, samples.len())?;
        check_finite(&samples, meta.pixels())?;
        Ok(Self { meta, samples })
    }

    /// Assemble a cube from `f64` bands; the metadata band count must match.
    pub fn from_grids(meta: RasterMeta, bands: &[Grid]) -> Result<Self> {
        if bands.len() != meta.bands {
            return Err(Error::GeometryMismatch(format!(
                "{} bands supplied for {} declared",
                bands.len(),
                meta.bands
            )));
        }
        let mut samples = Vec::with_capacity(meta.sample_count());
        for g in bands {
            if g.width() != meta.width || g.height() != meta.height {
                return Err(Error::GeometryMismatch(format!(
                    "band {}x{} in {}x{} cube",
                    g.width(),
                    g.height(),
                    meta.width,
                    meta.height
                )));
            }
            samples.extend(g.data().iter().map(|&v| v as f32));
        }
        Self::new(meta, samples)
    }

    #[inline]
    pub fn meta(&self) -> &RasterMeta {
        &self.meta
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.meta.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.meta.height
    }

    #[inline]
    pub fn bands(&self) -> usize {
        self.meta.bands
    }

    #[inline]
    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn band(&self, b: usize) -> &[f32] {
        let n = self.meta.pixels();
        &self.samples[b * n..(b + 1) * n]
    }

    pub fn band_grid(&self, b: usize) -> Grid {
        Grid::from_f32(self.meta.width, self.meta.height, self.band(b)).expect("valid cube")
    }

    pub fn grids(&self) -> Vec<Grid> {
        (0..self.bands()).map(|b| self.band_grid(b)).collect()
    }

    /// Spectrum of the pixel at (`row`, `col`).
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<f32> {
        let n = self.meta.pixels();
        let idx = row * self.meta.width + col;
        (0..self.bands()).map(|b| self.samples[b * n + idx]).collect()
    }

    pub fn band_at_wavelength(&self, target_nm: f64) -> usize {
        self.meta.band_at_wavelength(target_nm)
    }

    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<HyperCube> {
        let samples = crop_bsq(&self.samples, &self.meta, x, y, w, h)?;
        Ok(Self { meta: self.meta.with_grid(w, h, self.meta.gsd), samples })
    }

    /// Keep the listed bands, in the listed order.
    pub fn select_bands(&self, indices: &[usize]) -> Result<HyperCube> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("no bands selected".into()));
        }
        let mut samples = Vec::with_capacity(indices.len() * self.meta.pixels());
        let mut wavelengths = Vec::with_capacity(indices.len());
        let mut sources = self.meta.sources.as_ref().map(|_| Vec::with_capacity(indices.len()));
        for &i in indices {
            if i >= self.bands() {
                return Err(Error::InvalidArgument(format!("band {i} out of range")));
            }
            samples.extend_from_slice(self.band(i));
            wavelengths.push(self.meta.wavelengths[i]);
            if let (Some(out), Some(src)) = (sources.as_mut(), self.meta.sources.as_ref()) {
                out.push(src[i]);
            }
        }
        let meta = RasterMeta {
            bands: indices.len(),
            wavelengths,
            sources,
            ..self.meta.clone()
        };
        Self::new(meta, samples)
    }

    pub fn into_parts(self) -> (RasterMeta, Vec<f32>) {
        (self.meta, self.samples)
    }
}

/// Single-band panchromatic image (`PAN` or `PAN↓`).
#[derive(Debug, Clone, PartialEq)]
pub struct PanImage {
    meta: RasterMeta,
    samples: Vec<f32>,
}

impl PanImage {
    pub fn new(meta: RasterMeta, samples: Vec<f32>) -> Result<Self> {
        meta.validate()?;
        if meta.bands != 1 {
            return Err(Error::InvalidMeta(format!(
                "panchromatic image needs 1 band, got {}",
                meta.bands
            )));
        }
        check_payload(&meta, samples.len())?;
        check_finite(&samples, meta.pixels())?;
        Ok(Self { meta, samples })
    }

    pub fn from_grid(meta: RasterMeta, grid: &Grid) -> Result<Self> {
        if grid.width() != meta.width || grid.height() != meta.height {
            return Err(Error::GeometryMismatch(format!(
                "grid {}x{} for {}x{} image",
                grid.width(),
                grid.height(),
                meta.width,
                meta.height
            )));
        }
        Self::new(meta, grid.data().iter().map(|&v| v as f32).collect())
    }

    #[inline]
    pub fn meta(&self) -> &RasterMeta {
        &self.meta
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.meta.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.meta.height
    }

    #[inline]
    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn grid(&self) -> Grid {
        Grid::from_f32(self.meta.width, self.meta.height, &self.samples).expect("valid image")
    }

    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<PanImage> {
        let samples = crop_bsq(&self.samples, &self.meta, x, y, w, h)?;
        Ok(Self { meta: self.meta.with_grid(w, h, self.meta.gsd), samples })
    }

    pub fn into_parts(self) -> (RasterMeta, Vec<f32>) {
        (self.meta, self.samples)
    }
}

/// Per-pixel, per-band status codes of a detector cube.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCube {
    meta: RasterMeta,
    codes: Vec<u8>,
    invalid_codes: Vec<u8>,
}

impl ErrorCube {
    pub fn new(meta: RasterMeta, codes: Vec<u8>, mut invalid_codes: Vec<u8>) -> Result<Self> {
        meta.validate()?;
        check_payload(&meta, codes.len())?;
        invalid_codes.sort_unstable();
        invalid_codes.dedup();
        Ok(Self { meta, codes, invalid_codes })
    }

    #[inline]
    pub fn meta(&self) -> &RasterMeta {
        &self.meta
    }

    #[inline]
    pub fn bands(&self) -> usize {
        self.meta.bands
    }

    #[inline]
    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    #[inline]
    pub fn invalid_codes(&self) -> &[u8] {
        &self.invalid_codes
    }

    pub fn band(&self, b: usize) -> &[u8] {
        let n = self.meta.pixels();
        &self.codes[b * n..(b + 1) * n]
    }

    #[inline]
    pub fn is_invalid(&self, code: u8) -> bool {
        self.invalid_codes.binary_search(&code).is_ok()
    }

    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<ErrorCube> {
        let codes = crop_bsq(&self.codes, &self.meta, x, y, w, h)?;
        Ok(Self {
            meta: self.meta.with_grid(w, h, self.meta.gsd),
            codes,
            invalid_codes: self.invalid_codes.clone(),
        })
    }

    /// Error cube matches the pixel grid and band count of `cube`.
    pub fn matches(&self, cube: &HyperCube) -> bool {
        self.meta.width == cube.width()
            && self.meta.height == cube.height()
            && self.meta.bands == cube.bands()
    }
}

/// Dataset-wide band selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandMask {
    keep: Vec<bool>,
}

impl BandMask {
    pub fn new(keep: Vec<bool>) -> Result<Self> {
        if !keep.iter().any(|&k| k) {
            return Err(Error::AllBandsRemoved);
        }
        Ok(Self { keep })
    }

    pub fn all(bands: usize) -> Self {
        assert!(bands > 0, "empty mask");
        Self { keep: alloc::vec![true; bands] }
    }

    #[inline]
    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.keep.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn kept_count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        self.keep.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i).collect()
    }
}

fn check_scaled(what: &str, hi: &RasterMeta, lo: &RasterMeta, ratio: usize) -> Result<()> {
    if hi.width != lo.width * ratio || hi.height != lo.height * ratio {
        return Err(Error::GeometryMismatch(format!(
            "{what}: {}x{} is not {ratio}x {}x{}",
            hi.width, hi.height, lo.width, lo.height
        )));
    }
    if !approx_eq(lo.gsd, hi.gsd * ratio as f64) {
        return Err(Error::GeometryMismatch(format!(
            "{what}: gsd {} is not {ratio}x {}",
            lo.gsd, hi.gsd
        )));
    }
    Ok(())
}

/// Full-resolution evaluation unit `<PAN, HS>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrPair {
    pub pan: PanImage,
    pub hs: HyperCube,
    ratio: usize,
}

impl FrPair {
    pub fn new(pan: PanImage, hs: HyperCube, ratio: usize) -> Result<Self> {
        if ratio < 2 {
            return Err(Error::InvalidArgument(format!("ratio {ratio} < 2")));
        }
        check_scaled("FR pair", pan.meta(), hs.meta(), ratio)?;
        Ok(Self { pan, hs, ratio })
    }

    #[inline]
    pub fn ratio(&self) -> usize {
        self.ratio
    }
}

/// Reduced-resolution evaluation unit `<PAN↓, HS↓, HS>`.
#[derive(Debug, Clone, PartialEq)]
pub struct RrTriplet {
    pub pan_lo: PanImage,
    pub hs_lo: HyperCube,
    pub hs_ref: HyperCube,
    ratio: usize,
}

impl RrTriplet {
    pub fn new(pan_lo: PanImage, hs_lo: HyperCube, hs_ref: HyperCube, ratio: usize) -> Result<Self> {
        if ratio < 2 {
            return Err(Error::InvalidArgument(format!("ratio {ratio} < 2")));
        }
        if !pan_lo.meta().same_grid(hs_ref.meta()) {
            return Err(Error::GeometryMismatch(
                "PAN and reference HS must share a pixel grid".into(),
            ));
        }
        check_scaled("RR triplet", hs_ref.meta(), hs_lo.meta(), ratio)?;
        if hs_lo.bands() != hs_ref.bands() {
            return Err(Error::GeometryMismatch(format!(
                "bands: {} != {}",
                hs_lo.bands(),
                hs_ref.bands()
            )));
        }
        Ok(Self { pan_lo, hs_lo, hs_ref, ratio })
    }

    #[inline]
    pub fn ratio(&self) -> usize {
        self.ratio
    }
}
