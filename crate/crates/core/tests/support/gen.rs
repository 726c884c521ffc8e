//! Seeded random rasters for tests.
#![allow(dead_code)]

use hspan_core::{HyperCube, PanImage, RasterMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn wavelengths(bands: usize) -> Vec<f64> {
    (0..bands).map(|b| 450.0 + 10.0 * b as f64).collect()
}

/// Cube of uniform samples in `[lo, hi)`.
pub fn cube(rng: &mut ChaCha8Rng, w: usize, h: usize, bands: usize, gsd: f64, lo: f32, hi: f32) -> HyperCube {
    let meta = RasterMeta::new(w, h, gsd, wavelengths(bands)).unwrap();
    let samples = (0..w * h * bands).map(|_| rng.random_range(lo..hi)).collect();
    HyperCube::new(meta, samples).unwrap()
}

pub fn pan(rng: &mut ChaCha8Rng, w: usize, h: usize, gsd: f64, lo: f32, hi: f32) -> PanImage {
    let meta = RasterMeta::new(w, h, gsd, vec![550.0]).unwrap();
    PanImage::new(meta, (0..w * h).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}
