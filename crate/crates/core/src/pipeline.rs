//! Dataset construction: band cleaning, VNIR/SWIR concatenation, FR tiling
//! and reduced-resolution simulation.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{self, approx_eq};
use crate::raster::Degradation;
use crate::types::{
    BandMask, Detector, ErrorCube, FrPair, Grid, HyperCube, PanImage, RasterMeta, RrTriplet,
};

/// Fraction of the band's pixels whose status code is flagged invalid.
pub fn invalid_fraction(err: &ErrorCube, band: usize) -> f64 {
    let codes = err.band(band);
    let bad = codes.iter().filter(|&&c| err.is_invalid(c)).count();
    bad as f64 / codes.len() as f64
}

/// Invalid fraction of every band of one scene, VNIR bands first.
pub fn band_invalid_fractions(vnir_err: &ErrorCube, swir_err: &ErrorCube) -> Vec<f64> {
    (0..vnir_err.bands())
        .map(|b| invalid_fraction(vnir_err, b))
        .chain((0..swir_err.bands()).map(|b| invalid_fraction(swir_err, b)))
        .collect()
}

/// Combines per-scene fractions: a band survives only if it is below
/// `threshold` in every scene.
pub fn mask_from_fractions(per_scene: &[Vec<f64>], threshold: f64) -> Result<BandMask> {
    let Some(first) = per_scene.first() else {
        return Err(Error::InvalidArgument("no scenes to clean".into()));
    };
    let mut keep = alloc::vec![true; first.len()];
    for (i, fractions) in per_scene.iter().enumerate() {
        if fractions.len() != keep.len() {
            return Err(Error::GeometryMismatch(format!(
                "scene {i} has {} bands, expected {}",
                fractions.len(),
                keep.len()
            )));
        }
        for (k, &f) in keep.iter_mut().zip(fractions) {
            if f >= threshold {
                *k = false;
            }
        }
    }
    BandMask::new(keep)
}

/// Dataset-wide band mask: a band is dropped when at least `threshold` of
/// its pixels are invalid in any scene. VNIR bands come first in the mask.
pub fn clean_bands(scenes: &[(&ErrorCube, &ErrorCube)], threshold: f64) -> Result<BandMask> {
    if let Some((v0, s0)) = scenes.first() {
        for (i, (vnir, swir)) in scenes.iter().enumerate() {
            if vnir.bands() != v0.bands() || swir.bands() != s0.bands() {
                return Err(Error::GeometryMismatch(format!(
                    "scene {i} has {}+{} bands, expected {}+{}",
                    vnir.bands(),
                    swir.bands(),
                    v0.bands(),
                    s0.bands()
                )));
            }
        }
    }
    let fractions: Vec<Vec<f64>> = scenes.iter().map(|(v, s)| band_invalid_fractions(v, s)).collect();
    mask_from_fractions(&fractions, threshold)
}

/// Masked VNIR and SWIR bands merged in ascending wavelength order, with the
/// source detector of each band recorded in the metadata.
pub fn concat_cubes(vnir: &HyperCube, swir: &HyperCube, mask: &BandMask) -> Result<HyperCube> {
    if !vnir.meta().same_grid(swir.meta()) {
        return Err(Error::GeometryMismatch("VNIR and SWIR pixel grids differ".into()));
    }
    if mask.len() != vnir.bands() + swir.bands() {
        return Err(Error::GeometryMismatch(format!(
            "mask of {} bands for {}+{}",
            mask.len(),
            vnir.bands(),
            swir.bands()
        )));
    }
    let mut picked: Vec<(f64, Detector, &[f32])> = Vec::with_capacity(mask.kept_count());
    for (i, &keep) in mask.keep().iter().enumerate() {
        if !keep {
            continue;
        }
        if i < vnir.bands() {
            picked.push((vnir.meta().wavelengths[i], Detector::Vnir, vnir.band(i)));
        } else {
            let j = i - vnir.bands();
            picked.push((swir.meta().wavelengths[j], Detector::Swir, swir.band(j)));
        }
    }
    picked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut samples = Vec::with_capacity(picked.len() * vnir.meta().pixels());
    for (_, _, band) in &picked {
        samples.extend_from_slice(band);
    }
    let meta = RasterMeta {
        bands: picked.len(),
        wavelengths: picked.iter().map(|p| p.0).collect(),
        sources: Some(picked.iter().map(|p| p.1).collect()),
        ..vnir.meta().clone()
    };
    HyperCube::new(meta, samples)
}

/// One acquisition before cleaning.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneBundle {
    pub pan: PanImage,
    pub vnir: HyperCube,
    pub swir: HyperCube,
    pub vnir_err: ErrorCube,
    pub swir_err: ErrorCube,
}

impl SceneBundle {
    pub fn new(
        pan: PanImage,
        vnir: HyperCube,
        swir: HyperCube,
        vnir_err: ErrorCube,
        swir_err: ErrorCube,
    ) -> Result<Self> {
        if !vnir.meta().same_grid(swir.meta()) {
            return Err(Error::GeometryMismatch("VNIR and SWIR pixel grids differ".into()));
        }
        if !vnir_err.matches(&vnir) || !swir_err.matches(&swir) {
            return Err(Error::GeometryMismatch("error cube does not match its cube".into()));
        }
        Ok(Self { pan, vnir, swir, vnir_err, swir_err })
    }

    /// PAN to HS scale factor implied by the pixel grids.
    pub fn ratio(&self) -> Result<usize> {
        scale_ratio(&self.pan, self.vnir.width(), self.vnir.height(), self.vnir.meta().gsd)
    }

    /// Concatenated HS cube after applying the dataset mask.
    pub fn cleaned(&self, mask: &BandMask) -> Result<HyperCube> {
        concat_cubes(&self.vnir, &self.swir, mask)
    }
}

fn scale_ratio(pan: &PanImage, hs_w: usize, hs_h: usize, hs_gsd: f64) -> Result<usize> {
    let ratio = pan.width() / hs_w;
    if ratio < 2 || pan.width() != ratio * hs_w || pan.height() != ratio * hs_h {
        return Err(Error::GeometryMismatch(format!(
            "PAN {}x{} is not an integer multiple of HS {hs_w}x{hs_h}",
            pan.width(),
            pan.height()
        )));
    }
    if !approx_eq(hs_gsd, pan.meta().gsd * ratio as f64) {
        return Err(Error::GeometryMismatch(format!(
            "gsd {} is not {ratio}x PAN gsd {}",
            hs_gsd,
            pan.meta().gsd
        )));
    }
    Ok(ratio)
}

/// Placement of one tile on the HS and PAN grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TilePlacement {
    pub row: usize,
    pub col: usize,
    /// Top-left corner on the HS grid.
    pub hs_x: usize,
    pub hs_y: usize,
    /// Top-left corner on the PAN grid (`ratio` times the HS corner).
    pub pan_x: usize,
    pub pan_y: usize,
}

/// Non-overlapping grid anchored at the top-left; partial edge tiles are dropped.
pub fn tile_grid(hs_width: usize, hs_height: usize, hs_tile: usize, ratio: usize) -> Result<Vec<TilePlacement>> {
    if hs_tile == 0 {
        return Err(Error::InvalidArgument("tile size must be positive".into()));
    }
    let (rows, cols) = (hs_height / hs_tile, hs_width / hs_tile);
    if rows == 0 || cols == 0 {
        return Err(Error::SceneTooSmall);
    }
    let mut out = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let (hs_x, hs_y) = (col * hs_tile, row * hs_tile);
            out.push(TilePlacement { row, col, hs_x, hs_y, pan_x: hs_x * ratio, pan_y: hs_y * ratio });
        }
    }
    Ok(out)
}

/// One FR tile and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FrTile {
    pub placement: TilePlacement,
    pub pair: FrPair,
}

/// Cuts a cleaned scene into FR pairs.
pub fn tile_fr(pan: &PanImage, hs: &HyperCube, pan_tile: usize, hs_tile: usize) -> Result<Vec<FrTile>> {
    let ratio = scale_ratio(pan, hs.width(), hs.height(), hs.meta().gsd)?;
    if pan_tile != ratio * hs_tile {
        return Err(Error::InvalidArgument(format!(
            "PAN tile {pan_tile} is not {ratio}x HS tile {hs_tile}"
        )));
    }
    tile_grid(hs.width(), hs.height(), hs_tile, ratio)?
        .into_iter()
        .map(|placement| cut_tile(pan, hs, placement, pan_tile, hs_tile, ratio))
        .collect()
}

/// Extracts the FR pair at one placement.
pub fn cut_tile(
    pan: &PanImage,
    hs: &HyperCube,
    placement: TilePlacement,
    pan_tile: usize,
    hs_tile: usize,
    ratio: usize,
) -> Result<FrTile> {
    let p = placement;
    let pair = FrPair::new(
        pan.crop(p.pan_x, p.pan_y, pan_tile, pan_tile)?,
        hs.crop(p.hs_x, p.hs_y, hs_tile, hs_tile)?,
        ratio,
    )?;
    Ok(FrTile { placement, pair })
}

/// Simulates `<PAN↓, HS↓, HS>` from an FR pair by degrading both inputs.
pub fn make_rr(fr: &FrPair, degradation: &Degradation) -> Result<RrTriplet> {
    let ratio = degradation.ratio();
    if ratio != fr.ratio() {
        return Err(Error::InvalidArgument(format!(
            "degradation ratio {ratio} for FR ratio {}",
            fr.ratio()
        )));
    }
    let pan_meta = fr.pan.meta();
    let pan_lo_grid = degradation.apply(&fr.pan.grid())?;
    let pan_lo = PanImage::from_grid(
        pan_meta.with_grid(pan_lo_grid.width(), pan_lo_grid.height(), pan_meta.gsd * ratio as f64),
        &pan_lo_grid,
    )?;
    let hs_lo = degrade_cube(&fr.hs, degradation)?;
    RrTriplet::new(pan_lo, hs_lo, fr.hs.clone(), ratio)
}

/// Degrades every band of a cube, scaling its ground-sample distance.
pub fn degrade_cube(cube: &HyperCube, degradation: &Degradation) -> Result<HyperCube> {
    let bands: Vec<Grid> = (0..cube.bands())
        .map(|b| degradation.apply(&cube.band_grid(b)))
        .collect::<Result<_>>()?;
    let r = degradation.ratio();
    let meta = cube.meta().with_grid(cube.width() / r, cube.height() / r, cube.meta().gsd * r as f64);
    HyperCube::from_grids(meta, &bands)
}

/// Fraction of valid entries over the kept bands inside an HS-grid window.
pub fn tile_valid_fraction(
    vnir_err: &ErrorCube,
    swir_err: &ErrorCube,
    mask: &BandMask,
    window: (usize, usize, usize, usize),
) -> f64 {
    let (x, y, w, h) = window;
    let nv = vnir_err.bands();
    let (mut valid, mut total) = (0usize, 0usize);
    for (i, &keep) in mask.keep().iter().enumerate() {
        if !keep {
            continue;
        }
        let (err, b) = if i < nv { (vnir_err, i) } else { (swir_err, i - nv) };
        let width = err.meta().width;
        let codes = err.band(b);
        for row in y..y + h {
            for &c in &codes[row * width + x..row * width + x + w] {
                total += 1;
                valid += !err.is_invalid(c) as usize;
            }
        }
    }
    if total == 0 {
        return 0.0;
    }
    valid as f64 / total as f64
}

/// Train/test assignment of a scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Train,
    Test,
}

/// Seeded scene-level split. `test_fraction` of the scenes (rounded, at least
/// one) go to the test set; the assignment is returned in input order.
pub fn split_scenes(count: usize, test_fraction: f64, seed: u64) -> Vec<Split> {
    if count == 0 {
        return Vec::new();
    }
    let n_test = (math::round(count as f64 * test_fraction) as usize).clamp(1, count);
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = alloc::vec![Split::Train; count];
    for &i in &order[..n_test] {
        out[i] = Split::Test;
    }
    out
}
