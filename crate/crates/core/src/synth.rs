//! Seeded synthetic scenes for oracle tests and demos.
//!
//! The ground truth is a linear mixture of a few positive endmember spectra
//! with smooth random abundances. The PAN is the mean of the visible bands and
//! the HS input is the MTF-degraded ground truth.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::raster::{convolve_reflect, degrade, mean_std, Kernel2D, MtfSpec};
use crate::types::{FrPair, Grid, HyperCube, PanImage, RasterMeta};

/// PAN sampling distance of synthetic scenes, in meters.
pub const PAN_GSD: f64 = 5.0;
const ENDMEMBERS: usize = 4;
const PAN_RANGE_NM: (f64, f64) = (400.0, 700.0);

/// Evenly spaced band centers from 400 to 2500 nm.
pub fn synth_wavelengths(bands: usize) -> Vec<f64> {
    let step = 2100.0 / (bands.max(2) - 1) as f64;
    (0..bands).map(|b| 400.0 + step * b as f64).collect()
}

/// Builds an FR pair and its ground truth at PAN resolution.
///
/// `hs_size` is `(height, width)` of the HS input. Abundances vary on a scale
/// of half an HS pixel, so the PAN carries detail the HS input lacks.
pub fn gen_synth(seed: u64, hs_size: (usize, usize), bands: usize, ratio: usize) -> Result<(FrPair, HyperCube)> {
    gen_synth_smooth(seed, hs_size, bands, ratio, ratio as f64 / 2.0)
}

/// As [`gen_synth`] with the abundance correlation length (standard deviation
/// of the Gaussian smoothing, in PAN pixels) chosen by the caller.
pub fn gen_synth_smooth(
    seed: u64,
    hs_size: (usize, usize),
    bands: usize,
    ratio: usize,
    correlation_px: f64,
) -> Result<(FrPair, HyperCube)> {
    if bands < 2 {
        return Err(Error::InvalidArgument("synthetic scenes need at least two bands".into()));
    }
    if !(correlation_px > 0.0) {
        return Err(Error::InvalidArgument("correlation length must be positive".into()));
    }
    let (hs_h, hs_w) = hs_size;
    let (h, w) = (hs_h * ratio, hs_w * ratio);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wavelengths = synth_wavelengths(bands);

    let endmembers: Vec<Vec<f64>> = (0..ENDMEMBERS)
        .map(|_| endmember(&mut rng, &wavelengths))
        .collect();
    let smoother = gaussian_kernel(correlation_px)?;
    let mut fields = Vec::with_capacity(ENDMEMBERS);
    for _ in 0..ENDMEMBERS {
        let noise = Grid::from_fn(w, h, |_, _| rng.random_range(-1.0..1.0));
        let smooth = convolve_reflect(&noise, &smoother)?;
        let (mu, sd) = mean_std(smooth.data());
        let sd = if sd > 0.0 { sd } else { 1.0 };
        fields.push(smooth.map(|v| math::exp(1.5 * (v - mu) / sd)));
    }

    let mut truth_bands: Vec<Grid> = (0..bands).map(|_| Grid::filled(w, h, 0.0)).collect();
    for p in 0..w * h {
        let total: f64 = fields.iter().map(|f| f.data()[p]).sum();
        for (b, band) in truth_bands.iter_mut().enumerate() {
            let mix: f64 = fields
                .iter()
                .zip(&endmembers)
                .map(|(f, e)| f.data()[p] * e[b])
                .sum();
            band.data_mut()[p] = mix / total;
        }
    }
    let truth = HyperCube::from_grids(RasterMeta::new(w, h, PAN_GSD, wavelengths.clone())?, &truth_bands)?;

    let visible: Vec<usize> = (0..bands)
        .filter(|&b| (PAN_RANGE_NM.0..=PAN_RANGE_NM.1).contains(&wavelengths[b]))
        .collect();
    let mut pan = Grid::filled(w, h, 0.0);
    for &b in &visible {
        for (acc, &v) in pan.data_mut().iter_mut().zip(truth.band(b)) {
            *acc += v as f64;
        }
    }
    let pan = pan.map(|v| v / visible.len() as f64);
    let pan = PanImage::from_grid(RasterMeta::new(w, h, PAN_GSD, alloc::vec![550.0])?, &pan)?;

    let spec = MtfSpec::new(MtfSpec::DEFAULT_GAIN, ratio)?;
    let hs_bands: Vec<Grid> = (0..bands)
        .map(|b| degrade(&truth.band_grid(b), &spec))
        .collect::<Result<_>>()?;
    let hs = HyperCube::from_grids(
        RasterMeta::new(hs_w, hs_h, PAN_GSD * ratio as f64, wavelengths)?,
        &hs_bands,
    )?;
    Ok((FrPair::new(pan, hs, ratio)?, truth))
}

/// Smooth positive spectrum: a flat base plus three Gaussian features.
fn endmember(rng: &mut ChaCha8Rng, wavelengths: &[f64]) -> Vec<f64> {
    let base = rng.random_range(0.05..0.4);
    let features: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..0.4),
                rng.random_range(400.0..2500.0),
                rng.random_range(100.0..600.0),
            )
        })
        .collect();
    wavelengths
        .iter()
        .map(|&l| {
            base + features
                .iter()
                .map(|&(a, c, s)| a * math::exp(-((l - c) / s) * ((l - c) / s)))
                .sum::<f64>()
        })
        .collect()
}

fn gaussian_kernel(sigma: f64) -> Result<Kernel2D> {
    let radius = math::ceil(3.0 * sigma) as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|i| math::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let sum: f64 = taps.iter().sum();
    Kernel2D::separable(taps.into_iter().map(|t| t / sum).collect())
}
