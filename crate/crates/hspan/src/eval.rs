//! Runs sharpeners (or imports external results) over the test tiles of a
//! manifest and scores them.
//!
//! Work items are `(tile, method)` pairs executed on a dedicated pool of
//! `workers` threads. Results are collected in item order, so the report does
//! not depend on scheduling.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hspan_core::metrics::{score_fr, score_rr};
use hspan_core::raster::MtfSpec;
use hspan_core::sharpen::{Method, SharpenRequest};
use hspan_core::HyperCube;
use rayon::prelude::*;

use crate::container::{import_fused, load_cube, load_pan};
use crate::error::{Error, Result};
use crate::manifest::{resolve, Manifest, TileEntry};
use crate::report::{Failure, MetricReport, Protocol, ReportParams, Row, Scores};

/// A built-in sharpener or a directory of precomputed results laid out as
/// `<dir>/<tile id>/` containers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MethodSpec {
    Builtin(Method),
    Import { name: String, dir: PathBuf },
}

impl MethodSpec {
    pub fn name(&self) -> String {
        match self {
            MethodSpec::Builtin(m) => m.name().into(),
            MethodSpec::Import { name, .. } => name.clone(),
        }
    }

    /// `NAME=DIR`, or just `DIR` (named after its last component).
    pub fn import(arg: &str) -> Self {
        if let Some((name, dir)) = arg.split_once('=') {
            return MethodSpec::Import { name: name.into(), dir: dir.into() };
        }
        let dir = PathBuf::from(arg);
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        MethodSpec::Import { name, dir }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(MethodSpec::Builtin(s.parse()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub protocol: Protocol,
    pub methods: Vec<MethodSpec>,
    pub h_over_l: f64,
    pub nyquist_gain: f64,
    pub alpha: f64,
    pub beta: f64,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, protocol: Protocol, methods: Vec<MethodSpec>) -> Self {
        Self {
            manifest: manifest.into(),
            protocol,
            methods,
            h_over_l: 1.0 / 6.0,
            nyquist_gain: MtfSpec::DEFAULT_GAIN,
            alpha: 1.0,
            beta: 1.0,
            workers: 1,
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<MetricReport> {
    if cfg.methods.is_empty() {
        return Err(Error::Invalid("no methods to evaluate".into()));
    }
    let names: Vec<String> = cfg.methods.iter().map(MethodSpec::name).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Invalid(format!("method '{n}' given twice")));
        }
    }
    let manifest = Manifest::load(&cfg.manifest)?;
    let spec = MtfSpec::new(cfg.nyquist_gain, manifest.params.ratio)?;
    let tiles: Vec<&TileEntry> = manifest.test_tiles().collect();
    if tiles.is_empty() {
        return Err(Error::Invalid("manifest has no test tiles".into()));
    }
    let items: Vec<(&TileEntry, &MethodSpec)> =
        tiles.iter().flat_map(|&t| cfg.methods.iter().map(move |m| (t, m))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let outcomes: Vec<Result<Scores>> = pool.install(|| {
        items
            .par_iter()
            .map(|(tile, method)| evaluate(cfg, &spec, tile, method))
            .collect()
    });

    let (mut rows, mut failures) = (Vec::new(), Vec::new());
    for ((tile, method), outcome) in items.iter().zip(outcomes) {
        match outcome {
            Ok(scores) => rows.push(Row { tile: tile.id(), method: method.name(), scores }),
            Err(e) => failures.push(Failure { tile: tile.id(), method: method.name(), error: e.to_string() }),
        }
    }
    let params = ReportParams {
        protocol: cfg.protocol,
        ratio: spec.ratio,
        nyquist_gain: spec.nyquist_gain,
        kernel_size: spec.kernel_size,
        h_over_l: cfg.h_over_l,
        alpha: cfg.alpha,
        beta: cfg.beta,
    };
    Ok(MetricReport::new(params, rows, failures, &names))
}

/// Reduced-resolution protocol: fuse `<PAN↓, HS↓>`, compare with HS.
pub fn run_rr(cfg: &RunConfig) -> Result<MetricReport> {
    run(&RunConfig { protocol: Protocol::Rr, ..cfg.clone() })
}

/// Full-resolution protocol: fuse `<PAN, HS>`, score without a reference.
pub fn run_fr(cfg: &RunConfig) -> Result<MetricReport> {
    run(&RunConfig { protocol: Protocol::Fr, ..cfg.clone() })
}

fn fuse(req: &SharpenRequest<'_>, method: &MethodSpec, tile: &TileEntry) -> Result<HyperCube> {
    match method {
        MethodSpec::Builtin(m) => Ok(m.sharpen(req)?),
        MethodSpec::Import { dir, .. } => import_fused(&import_path(dir, tile), &req.fused_meta()),
    }
}

fn evaluate(cfg: &RunConfig, spec: &MtfSpec, tile: &TileEntry, method: &MethodSpec) -> Result<Scores> {
    let path = |rel: &str| resolve(&cfg.manifest, rel);
    match cfg.protocol {
        Protocol::Rr => {
            let missing = || Error::Invalid(format!("tile {} has no RR triplet", tile.id()));
            let pan_lo = load_pan(&path(tile.rr_pan_lo.as_deref().ok_or_else(missing)?))?;
            let hs_lo = load_cube(&path(tile.rr_hs_lo.as_deref().ok_or_else(missing)?))?;
            let reference = load_cube(&path(tile.rr_hs_ref.as_deref().ok_or_else(missing)?))?;
            let req = SharpenRequest::new(&pan_lo, &hs_lo, *spec)?;
            let fused = fuse(&req, method, tile)?;
            Ok(Scores::Rr(score_rr(&fused, &reference, cfg.h_over_l)?))
        }
        Protocol::Fr => {
            let pan = load_pan(&path(&tile.fr_pan))?;
            let hs = load_cube(&path(&tile.fr_hs))?;
            let req = SharpenRequest::new(&pan, &hs, *spec)?;
            let fused = fuse(&req, method, tile)?;
            Ok(Scores::Fr(score_fr(&fused, &pan, &hs, spec, cfg.alpha, cfg.beta)?))
        }
    }
}

/// Directory where an import method looks for its result on `tile`.
pub fn import_path(dir: &Path, tile: &TileEntry) -> PathBuf {
    dir.join(tile.id())
}
