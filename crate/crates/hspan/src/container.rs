//! Directory containers: `meta.json` plus a raw band-sequential `data.bin`.
//!
//! Rasters are little-endian `f32`; error cubes hold one `u8` status code per
//! sample.

use std::fs;
use std::path::Path;

use hspan_core::sharpen::check_fused;
use hspan_core::types::Detector;
use hspan_core::{ErrorCube, HyperCube, PanImage, RasterMeta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

pub const META_FILE: &str = "meta.json";
pub const DATA_FILE: &str = "data.bin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Hypercube,
    Pan,
    Errorcube,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFile {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub dtype: String,
    pub layout: String,
    pub gsd_m: f64,
    pub wavelengths_nm: Vec<f64>,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invalid_codes: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodata: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_sources: Option<Vec<Detector>>,
}

impl MetaFile {
    fn new(meta: &RasterMeta, kind: Kind) -> Self {
        Self {
            width: meta.width,
            height: meta.height,
            bands: meta.bands,
            dtype: if kind == Kind::Errorcube { "u8" } else { "f32le" }.into(),
            layout: "bsq".into(),
            gsd_m: meta.gsd,
            wavelengths_nm: meta.wavelengths.clone(),
            kind,
            invalid_codes: None,
            nodata: meta.nodata,
            band_sources: meta.sources.clone(),
        }
    }

    fn raster_meta(&self) -> RasterMeta {
        RasterMeta {
            width: self.width,
            height: self.height,
            bands: self.bands,
            gsd: self.gsd_m,
            wavelengths: self.wavelengths_nm.clone(),
            nodata: self.nodata,
            sources: self.band_sources.clone(),
        }
    }

    fn sample_bytes(&self) -> usize {
        if self.kind == Kind::Errorcube { 1 } else { 4 }
    }
}

/// Any container found on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Container {
    Cube(HyperCube),
    Pan(PanImage),
    Errors(ErrorCube),
}

fn bad(dir: &Path, msg: impl Into<String>) -> Error {
    Error::Container { path: dir.to_path_buf(), msg: msg.into() }
}

pub fn read_meta(dir: &Path) -> Result<MetaFile> {
    let path = dir.join(META_FILE);
    let text = fs::read_to_string(&path).at(&path)?;
    let meta: MetaFile = serde_json::from_str(&text).map_err(|source| Error::Json { path: path.clone(), source })?;
    let dtype = if meta.kind == Kind::Errorcube { "u8" } else { "f32le" };
    if meta.dtype != dtype {
        return Err(bad(dir, format!("dtype '{}' for kind {:?}, expected '{dtype}'", meta.dtype, meta.kind)));
    }
    if meta.layout != "bsq" {
        return Err(bad(dir, format!("layout '{}', expected 'bsq'", meta.layout)));
    }
    if meta.kind == Kind::Errorcube && meta.invalid_codes.is_none() {
        return Err(bad(dir, "error cube without invalid_codes"));
    }
    Ok(meta)
}

pub fn load(dir: &Path) -> Result<Container> {
    let meta = read_meta(dir)?;
    let path = dir.join(DATA_FILE);
    let bytes = fs::read(&path).at(&path)?;
    let expected = meta.width * meta.height * meta.bands * meta.sample_bytes();
    if bytes.len() != expected {
        return Err(bad(
            dir,
            format!("payload size mismatch: expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let raster = meta.raster_meta();
    let wrap = |e: hspan_core::Error| bad(dir, e.to_string());
    Ok(match meta.kind {
        Kind::Errorcube => Container::Errors(
            ErrorCube::new(raster, bytes, meta.invalid_codes.clone().unwrap_or_default()).map_err(wrap)?,
        ),
        kind => {
            let samples: Vec<f32> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            if kind == Kind::Pan {
                Container::Pan(PanImage::new(raster, samples).map_err(wrap)?)
            } else {
                Container::Cube(HyperCube::new(raster, samples).map_err(wrap)?)
            }
        }
    })
}

pub fn load_cube(dir: &Path) -> Result<HyperCube> {
    match load(dir)? {
        Container::Cube(c) => Ok(c),
        _ => Err(bad(dir, "expected a hypercube container")),
    }
}

pub fn load_pan(dir: &Path) -> Result<PanImage> {
    match load(dir)? {
        Container::Pan(p) => Ok(p),
        _ => Err(bad(dir, "expected a pan container")),
    }
}

pub fn load_errors(dir: &Path) -> Result<ErrorCube> {
    match load(dir)? {
        Container::Errors(e) => Ok(e),
        _ => Err(bad(dir, "expected an errorcube container")),
    }
}

fn write(dir: &Path, meta: &MetaFile, payload: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).at(dir)?;
    let json = serde_json::to_string_pretty(meta).map_err(|source| Error::Json { path: dir.join(META_FILE), source })?;
    fs::write(dir.join(META_FILE), json + "\n").at(dir.join(META_FILE))?;
    fs::write(dir.join(DATA_FILE), payload).at(dir.join(DATA_FILE))
}

fn f32_payload(dir: &Path, samples: &[f32]) -> Result<Vec<u8>> {
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(bad(dir, format!("refusing to write non-finite sample at index {i}")));
    }
    Ok(samples.iter().flat_map(|v| v.to_le_bytes()).collect())
}

pub fn store_cube(dir: &Path, cube: &HyperCube) -> Result<()> {
    let payload = f32_payload(dir, cube.samples())?;
    write(dir, &MetaFile::new(cube.meta(), Kind::Hypercube), &payload)
}

pub fn store_pan(dir: &Path, pan: &PanImage) -> Result<()> {
    let payload = f32_payload(dir, pan.samples())?;
    write(dir, &MetaFile::new(pan.meta(), Kind::Pan), &payload)
}

pub fn store_errors(dir: &Path, err: &ErrorCube) -> Result<()> {
    let mut meta = MetaFile::new(err.meta(), Kind::Errorcube);
    meta.invalid_codes = Some(err.invalid_codes().to_vec());
    write(dir, &meta, err.codes())
}

pub fn store(dir: &Path, container: &Container) -> Result<()> {
    match container {
        Container::Cube(c) => store_cube(dir, c),
        Container::Pan(p) => store_pan(dir, p),
        Container::Errors(e) => store_errors(dir, e),
    }
}

/// Loads an externally produced fused cube and checks it against the
/// geometry a sharpener would have produced.
pub fn import_fused(dir: &Path, expected: &RasterMeta) -> Result<HyperCube> {
    let cube = load_cube(dir)?;
    check_fused(&cube, expected).map_err(|e| bad(dir, e.to_string()))?;
    Ok(cube)
}

/// Copy of `cube` with negative samples set to zero, for export.
pub fn clamp_negative(cube: &HyperCube) -> Result<HyperCube> {
    let (meta, mut samples) = cube.clone().into_parts();
    samples.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(HyperCube::new(meta, samples)?)
}
