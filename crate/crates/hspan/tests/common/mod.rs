#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use hspan::container::{store_cube, store_errors, store_pan};
use hspan_core::{ErrorCube, HyperCube, PanImage, RasterMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INVALID: u8 = 1;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cube(rng: &mut ChaCha8Rng, w: usize, h: usize, gsd: f64, wavelengths: Vec<f64>) -> HyperCube {
    let n = w * h * wavelengths.len();
    let samples = (0..n).map(|_| rng.random_range(0.05f32..1.0)).collect();
    HyperCube::new(RasterMeta::new(w, h, gsd, wavelengths).unwrap(), samples).unwrap()
}

pub fn pan(rng: &mut ChaCha8Rng, w: usize, h: usize, gsd: f64) -> PanImage {
    let samples = (0..w * h).map(|_| rng.random_range(0.05f32..1.0)).collect();
    PanImage::new(RasterMeta::new(w, h, gsd, vec![550.0]).unwrap(), samples).unwrap()
}

/// Error cube whose band `b` has `invalid[b]` leading pixels flagged.
pub fn errors(w: usize, h: usize, wavelengths: Vec<f64>, invalid: &[usize]) -> ErrorCube {
    let pixels = w * h;
    let codes = invalid
        .iter()
        .flat_map(|&k| (0..pixels).map(move |p| if p < k { INVALID } else { 0 }))
        .collect();
    ErrorCube::new(RasterMeta::new(w, h, 30.0, wavelengths).unwrap(), codes, vec![INVALID]).unwrap()
}

pub const VNIR_NM: [f64; 3] = [450.0, 650.0, 950.0];
pub const SWIR_NM: [f64; 3] = [930.0, 1600.0, 2200.0];

/// Raw scene at 30 m HS / 5 m PAN with per-band invalid pixel counts
/// (VNIR bands first, then SWIR).
pub fn write_scene(dir: &Path, seed: u64, hs: (usize, usize), invalid: [usize; 6]) {
    let (w, h) = hs;
    let mut rng = rng(seed);
    store_pan(&dir.join("pan"), &pan(&mut rng, 6 * w, 6 * h, 5.0)).unwrap();
    store_cube(&dir.join("vnir"), &cube(&mut rng, w, h, 30.0, VNIR_NM.to_vec())).unwrap();
    store_cube(&dir.join("swir"), &cube(&mut rng, w, h, 30.0, SWIR_NM.to_vec())).unwrap();
    store_errors(&dir.join("vnir_err"), &errors(w, h, VNIR_NM.to_vec(), &invalid[..3])).unwrap();
    store_errors(&dir.join("swir_err"), &errors(w, h, SWIR_NM.to_vec(), &invalid[3..])).unwrap();
}

pub fn hspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hspan")).args(args).output().expect("spawn hspan")
}

pub fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}
