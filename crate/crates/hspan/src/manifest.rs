//! `manifest.json`: dataset parameters, the global band mask and one entry
//! per tile. Container paths are relative to the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use hspan_core::pipeline::Split;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Absent for synthetic datasets, which have no error cubes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invalid_threshold: Option<f64>,
    pub hs_tile: usize,
    pub pan_tile: usize,
    pub ratio: usize,
    pub rr: bool,
    /// `false` when RR triplets were degraded with the ideal low-pass filter.
    pub mtf: bool,
    pub nyquist_gain: f64,
    pub split_seed: u64,
    pub test_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_valid_fraction: Option<f64>,
    /// Wavelengths of the cleaned, concatenated cube.
    pub wavelengths_nm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileEntry {
    pub scene: String,
    pub row: usize,
    pub col: usize,
    pub split: Split,
    pub fr_pan: String,
    pub fr_hs: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rr_pan_lo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rr_hs_lo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rr_hs_ref: Option<String>,
    /// Ground truth at PAN resolution; synthetic datasets only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
}

impl TileEntry {
    /// Stable identifier, also the directory name used for imports.
    pub fn id(&self) -> String {
        tile_id(&self.scene, self.row, self.col)
    }
}

pub fn tile_id(scene: &str, row: usize, col: usize) -> String {
    format!("{scene}_r{row}_c{col}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub params: Params,
    pub band_mask: Vec<bool>,
    pub tiles: Vec<TileEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).at(path)?;
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
        fs::write(path, json + "\n").at(path)
    }

    pub fn test_tiles(&self) -> impl Iterator<Item = &TileEntry> {
        self.tiles.iter().filter(|t| t.split == Split::Test)
    }
}

/// Resolves a manifest-relative container path.
pub fn resolve(manifest_path: &Path, rel: &str) -> PathBuf {
    manifest_path.parent().unwrap_or(Path::new(".")).join(rel)
}
