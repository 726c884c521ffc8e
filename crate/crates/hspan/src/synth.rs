//! Synthetic datasets laid out like prepared ones, with ground truth.

use std::fs;
use std::path::Path;

use hspan_core::pipeline::{make_rr, Split};
use hspan_core::raster::{Degradation, MtfSpec};
use hspan_core::synth::gen_synth;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::container::{store_cube, store_pan};
use crate::error::{Error, IoContext, Result};
use crate::manifest::{tile_id, Manifest, Params, TileEntry, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    /// `(height, width)` of each HS tile.
    pub hs_size: (usize, usize),
    pub bands: usize,
    pub ratio: usize,
    pub tiles: usize,
}

/// Writes `tiles` independent synthetic scenes (one tile each, all in the
/// test split) and their manifest.
pub fn write_synth_dataset(cfg: &SynthConfig, out: &Path) -> Result<Manifest> {
    if cfg.tiles == 0 {
        return Err(Error::Invalid("at least one tile is required".into()));
    }
    let (h, w) = cfg.hs_size;
    if h != w {
        return Err(Error::Invalid(format!("synthetic tiles must be square, got {h}x{w}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.tiles).map(|_| rng.random()).collect();
    let spec = MtfSpec::new(MtfSpec::DEFAULT_GAIN, cfg.ratio)?;
    let degradation = Degradation::mtf(&spec)?;
    fs::create_dir_all(out).at(out)?;

    let tiles: Vec<(TileEntry, Vec<f64>)> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, &seed)| {
            let (fr, truth) = gen_synth(seed, cfg.hs_size, cfg.bands, cfg.ratio)?;
            let rr = make_rr(&fr, &degradation)?;
            let scene = format!("synth{k:03}");
            let id = tile_id(&scene, 0, 0);
            let rel = |name: &str| format!("tiles/{id}/{name}");
            store_pan(&out.join(rel("fr_pan")), &fr.pan)?;
            store_cube(&out.join(rel("fr_hs")), &fr.hs)?;
            store_pan(&out.join(rel("rr_pan_lo")), &rr.pan_lo)?;
            store_cube(&out.join(rel("rr_hs_lo")), &rr.hs_lo)?;
            store_cube(&out.join(rel("truth")), &truth)?;
            let entry = TileEntry {
                scene,
                row: 0,
                col: 0,
                split: Split::Test,
                fr_pan: rel("fr_pan"),
                fr_hs: rel("fr_hs"),
                rr_pan_lo: Some(rel("rr_pan_lo")),
                rr_hs_lo: Some(rel("rr_hs_lo")),
                rr_hs_ref: Some(rel("fr_hs")),
                truth: Some(rel("truth")),
            };
            Ok((entry, fr.hs.meta().wavelengths.clone()))
        })
        .collect::<Result<_>>()?;

    let wavelengths = tiles[0].1.clone();
    let manifest = Manifest {
        params: Params {
            invalid_threshold: None,
            hs_tile: w,
            pan_tile: w * cfg.ratio,
            ratio: cfg.ratio,
            rr: true,
            mtf: true,
            nyquist_gain: spec.nyquist_gain,
            split_seed: cfg.seed,
            test_fraction: 1.0,
            min_valid_fraction: None,
            wavelengths_nm: wavelengths.clone(),
        },
        band_mask: vec![true; wavelengths.len()],
        tiles: tiles.into_iter().map(|(t, _)| t).collect(),
    };
    manifest.store(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}
