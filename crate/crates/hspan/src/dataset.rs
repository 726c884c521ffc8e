//! Builds a tiled FR/RR dataset from raw scenes.
//!
//! Each scene directory holds five containers: `pan`, `vnir`, `swir`,
//! `vnir_err` and `swir_err`. Scenes are processed in parallel; the manifest
//! lists tiles in scene-id order, then row-major tile order.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use hspan_core::pipeline::{
    band_invalid_fractions, cut_tile, make_rr, mask_from_fractions, split_scenes, tile_grid,
    tile_valid_fraction, SceneBundle, Split,
};
use hspan_core::raster::{default_kernel_size, Degradation, MtfSpec};
use hspan_core::BandMask;
use rayon::prelude::*;

use crate::container::{load_cube, load_errors, load_pan, store_cube, store_pan};
use crate::error::{Error, IoContext, Result};
use crate::manifest::{tile_id, Manifest, Params, TileEntry, MANIFEST_FILE};

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareConfig {
    pub invalid_threshold: f64,
    pub hs_tile: usize,
    pub pan_tile: usize,
    pub ratio: usize,
    pub rr: bool,
    pub mtf: bool,
    pub nyquist_gain: f64,
    pub split_seed: u64,
    pub test_fraction: f64,
    pub min_valid_fraction: Option<f64>,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        Self {
            invalid_threshold: 0.05,
            hs_tile: 384,
            pan_tile: 2304,
            ratio: 6,
            rr: true,
            mtf: true,
            nyquist_gain: MtfSpec::DEFAULT_GAIN,
            split_seed: 0,
            test_fraction: 0.2,
            min_valid_fraction: None,
        }
    }
}

impl PrepareConfig {
    pub fn degradation(&self) -> Result<Degradation> {
        Ok(if self.mtf {
            Degradation::mtf(&MtfSpec::new(self.nyquist_gain, self.ratio)?)?
        } else {
            Degradation::ideal(self.ratio, default_kernel_size(self.ratio))?
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneSource {
    pub id: String,
    pub dir: PathBuf,
}

/// Every subdirectory of `root`, sorted by name.
pub fn discover_scenes(root: &Path) -> Result<Vec<SceneSource>> {
    let mut scenes = Vec::new();
    for entry in fs::read_dir(root).at(root)? {
        let entry = entry.at(root)?;
        if entry.file_type().at(entry.path())?.is_dir() {
            scenes.push(SceneSource { id: entry.file_name().to_string_lossy().into_owned(), dir: entry.path() });
        }
    }
    scenes.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(scenes)
}

pub fn load_scene(dir: &Path) -> Result<SceneBundle> {
    Ok(SceneBundle::new(
        load_pan(&dir.join("pan"))?,
        load_cube(&dir.join("vnir"))?,
        load_cube(&dir.join("swir"))?,
        load_errors(&dir.join("vnir_err"))?,
        load_errors(&dir.join("swir_err"))?,
    )?)
}

/// Dataset-global band mask from the error cubes of every scene.
pub fn scene_band_mask(scenes: &[SceneSource], threshold: f64) -> Result<BandMask> {
    let fractions: Vec<Vec<f64>> = scenes
        .par_iter()
        .map(|s| {
            let vnir = load_errors(&s.dir.join("vnir_err"))?;
            let swir = load_errors(&s.dir.join("swir_err"))?;
            Ok(band_invalid_fractions(&vnir, &swir))
        })
        .collect::<Result<_>>()?;
    Ok(mask_from_fractions(&fractions, threshold)?)
}

/// Cleans, tiles and optionally degrades every scene into `out`, then writes
/// `out/manifest.json`.
pub fn build_dataset(scenes: &[SceneSource], cfg: &PrepareConfig, out: &Path) -> Result<Manifest> {
    let mut sorted = scenes.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut seen = BTreeSet::new();
    for s in &sorted {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::Invalid(format!("duplicate scene id '{}'", s.id)));
        }
    }
    if sorted.is_empty() {
        return Err(Error::Invalid("no scenes found".into()));
    }
    if cfg.pan_tile != cfg.ratio * cfg.hs_tile {
        return Err(Error::Invalid(format!(
            "PAN tile {} is not {} x HS tile {}",
            cfg.pan_tile, cfg.ratio, cfg.hs_tile
        )));
    }
    let degradation = cfg.degradation()?;
    let mask = scene_band_mask(&sorted, cfg.invalid_threshold)?;
    let splits = split_scenes(sorted.len(), cfg.test_fraction, cfg.split_seed);
    fs::create_dir_all(out).at(out)?;

    let per_scene: Vec<(Vec<TileEntry>, Vec<f64>)> = sorted
        .par_iter()
        .zip(splits.par_iter())
        .map(|(scene, &split)| prepare_scene(scene, split, &mask, cfg, &degradation, out))
        .collect::<Result<_>>()?;

    let wavelengths = per_scene[0].1.clone();
    if let Some((i, _)) = per_scene.iter().enumerate().find(|(_, (_, wl))| *wl != wavelengths) {
        return Err(Error::Invalid(format!("scene '{}' has different band centers", sorted[i].id)));
    }
    let manifest = Manifest {
        params: Params {
            invalid_threshold: Some(cfg.invalid_threshold),
            hs_tile: cfg.hs_tile,
            pan_tile: cfg.pan_tile,
            ratio: cfg.ratio,
            rr: cfg.rr,
            mtf: cfg.mtf,
            nyquist_gain: cfg.nyquist_gain,
            split_seed: cfg.split_seed,
            test_fraction: cfg.test_fraction,
            min_valid_fraction: cfg.min_valid_fraction,
            wavelengths_nm: wavelengths,
        },
        band_mask: mask.keep().to_vec(),
        tiles: per_scene.into_iter().flat_map(|(tiles, _)| tiles).collect(),
    };
    manifest.store(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

fn prepare_scene(
    scene: &SceneSource,
    split: Split,
    mask: &BandMask,
    cfg: &PrepareConfig,
    degradation: &Degradation,
    out: &Path,
) -> Result<(Vec<TileEntry>, Vec<f64>)> {
    let bundle = load_scene(&scene.dir)?;
    let ratio = bundle.ratio()?;
    if ratio != cfg.ratio {
        return Err(Error::Invalid(format!("scene '{}' has ratio {ratio}, expected {}", scene.id, cfg.ratio)));
    }
    let hs = bundle.cleaned(mask)?;
    let mut tiles = Vec::new();
    for placement in tile_grid(hs.width(), hs.height(), cfg.hs_tile, ratio)? {
        if let Some(min) = cfg.min_valid_fraction {
            let window = (placement.hs_x, placement.hs_y, cfg.hs_tile, cfg.hs_tile);
            if tile_valid_fraction(&bundle.vnir_err, &bundle.swir_err, mask, window) < min {
                continue;
            }
        }
        let tile = cut_tile(&bundle.pan, &hs, placement, cfg.pan_tile, cfg.hs_tile, ratio)?;
        let id = tile_id(&scene.id, placement.row, placement.col);
        let rel = |name: &str| format!("tiles/{id}/{name}");
        store_pan(&out.join(rel("fr_pan")), &tile.pair.pan)?;
        store_cube(&out.join(rel("fr_hs")), &tile.pair.hs)?;
        let mut entry = TileEntry {
            scene: scene.id.clone(),
            row: placement.row,
            col: placement.col,
            split,
            fr_pan: rel("fr_pan"),
            fr_hs: rel("fr_hs"),
            rr_pan_lo: None,
            rr_hs_lo: None,
            rr_hs_ref: None,
            truth: None,
        };
        if cfg.rr {
            let rr = make_rr(&tile.pair, degradation)?;
            store_pan(&out.join(rel("rr_pan_lo")), &rr.pan_lo)?;
            store_cube(&out.join(rel("rr_hs_lo")), &rr.hs_lo)?;
            entry.rr_pan_lo = Some(rel("rr_pan_lo"));
            entry.rr_hs_lo = Some(rel("rr_hs_lo"));
            // The reference is the FR HS tile itself.
            entry.rr_hs_ref = Some(rel("fr_hs"));
        }
        tiles.push(entry);
    }
    Ok((tiles, hs.meta().wavelengths.clone()))
}
