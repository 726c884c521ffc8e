//! Spectral-signature analysis and 8-bit color composites.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::raster::MtfSpec;
use crate::types::HyperCube;

/// Pixel rectangle `(x, y)` top-left, `width` by `height`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self { x, y, width, height }
    }

    /// Centered window of at most `size` by `size` pixels.
    pub fn centered(width: usize, height: usize, size: usize) -> Self {
        let (w, h) = (size.min(width), size.min(height));
        Self::new((width - w) / 2, (height - h) / 2, w, h)
    }

    fn check(&self, width: usize, height: usize) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("empty region of interest".into()));
        }
        if self.x + self.width > width || self.y + self.height > height {
            return Err(Error::InvalidArgument(format!(
                "region {}x{}+{}+{} outside {width}x{height}",
                self.width, self.height, self.x, self.y
            )));
        }
        Ok(())
    }
}

/// Mean value of each band over the region.
pub fn extract_signature(cube: &HyperCube, roi: Roi) -> Result<Vec<f64>> {
    roi.check(cube.width(), cube.height())?;
    let n = (roi.width * roi.height) as f64;
    Ok((0..cube.bands())
        .map(|b| {
            let band = cube.band(b);
            let mut sum = 0.0;
            for row in roi.y..roi.y + roi.height {
                let start = row * cube.width() + roi.x;
                sum += band[start..start + roi.width].iter().map(|&v| v as f64).sum::<f64>();
            }
            sum / n
        })
        .collect())
}

/// Per-band mean absolute difference between two cubes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignatureDifference {
    pub absolute: Vec<f64>,
    /// Absolute difference over the reference band's max minus min; `None`
    /// for flat reference bands.
    pub normalized: Vec<Option<f64>>,
}

/// Compares cubes on the same grid with the same bands.
pub fn signature_difference(fused: &HyperCube, reference: &HyperCube) -> Result<SignatureDifference> {
    let (fm, rm) = (fused.meta(), reference.meta());
    if !fm.same_grid(rm) || fm.bands != rm.bands {
        return Err(Error::GeometryMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            fm.width, fm.height, fm.bands, rm.width, rm.height, rm.bands
        )));
    }
    let mut absolute = Vec::with_capacity(fm.bands);
    let mut normalized = Vec::with_capacity(fm.bands);
    for b in 0..fm.bands {
        let (f, r) = (fused.band(b), reference.band(b));
        let mad = f.iter().zip(r).map(|(&a, &c)| (a as f64 - c as f64).abs()).sum::<f64>() / f.len() as f64;
        let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v as f64), hi.max(v as f64))
        });
        absolute.push(mad);
        normalized.push((hi > lo).then(|| mad / (hi - lo)));
    }
    Ok(SignatureDifference { absolute, normalized })
}

/// As [`signature_difference`], first degrading the fused cube to the
/// reference grid when the two differ in size.
pub fn signature_difference_at_reference(
    fused: &HyperCube,
    reference: &HyperCube,
    spec: &MtfSpec,
) -> Result<SignatureDifference> {
    if fused.meta().same_grid(reference.meta()) {
        return signature_difference(fused, reference);
    }
    let degraded = crate::pipeline::degrade_cube(fused, &crate::raster::Degradation::mtf(spec)?)?;
    signature_difference(&degraded, reference)
}

/// Nearest-rank percentile, `p` in `[0, 100]`. `sorted` must be ascending.
pub fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = math::ceil(p / 100.0 * n as f64) as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Interleaved 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// Linear percentile stretch of one band to `0..=255`. A band whose two
/// percentiles coincide maps to all zeros.
pub fn stretch_band(values: &[f32], stretch: (f64, f64)) -> Vec<u8> {
    let mut sorted: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let lo = percentile_nearest_rank(&sorted, stretch.0);
    let hi = percentile_nearest_rank(&sorted, stretch.1);
    if hi <= lo {
        return alloc::vec![0; values.len()];
    }
    values
        .iter()
        .map(|&v| (((v as f64 - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0) as u8)
        .collect()
}

/// Color composite from the bands nearest to three target wavelengths, in
/// R, G, B order.
pub fn render_rgb(cube: &HyperCube, wavelengths_nm: [f64; 3], stretch: (f64, f64)) -> Result<RgbImage> {
    let (p_lo, p_hi) = stretch;
    if !(0.0..=100.0).contains(&p_lo) || !(0.0..=100.0).contains(&p_hi) || p_lo >= p_hi {
        return Err(Error::InvalidArgument(format!("bad stretch percentiles ({p_lo}, {p_hi})")));
    }
    let channels: Vec<Vec<u8>> = wavelengths_nm
        .iter()
        .map(|&nm| stretch_band(cube.band(cube.band_at_wavelength(nm)), stretch))
        .collect();
    let mut pixels = Vec::with_capacity(3 * cube.meta().pixels());
    for p in 0..cube.meta().pixels() {
        pixels.extend(channels.iter().map(|c| c[p]));
    }
    Ok(RgbImage { width: cube.width(), height: cube.height(), pixels })
}
