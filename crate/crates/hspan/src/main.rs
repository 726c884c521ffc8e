use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hspan::container::{clamp_negative, load_cube, load_pan, store_cube};
use hspan::dataset::{build_dataset, discover_scenes, PrepareConfig};
use hspan::eval::{run, MethodSpec, RunConfig};
use hspan::render::{composite, write_png};
use hspan::report::{emit, Format, Protocol};
use hspan::synth::{write_synth_dataset, SynthConfig};
use hspan::{Error, Result};
use hspan_core::analysis::{extract_signature, signature_difference_at_reference, Roi};
use hspan_core::raster::MtfSpec;
use hspan_core::sharpen::{Method, SharpenRequest};
use serde_json::json;

const EXIT_INVALID: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "hspan", version, about = "Hyperspectral pansharpening benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, tile and degrade raw scenes into a dataset with a manifest.
    Prepare(PrepareArgs),
    /// Pansharpen one PAN/HS pair with a built-in method.
    Sharpen(SharpenArgs),
    /// Score methods over the test tiles of a manifest.
    Eval(EvalArgs),
    /// Write a synthetic dataset with ground truth.
    Synth(SynthArgs),
    /// Percentile-stretched RGB composite of a cube.
    Render(RenderArgs),
    /// Mean spectrum over a region, optionally compared with a reference cube.
    Signature(SignatureArgs),
}

#[derive(Args)]
struct PrepareArgs {
    #[arg(long)]
    scenes: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    invalid_threshold: f64,
    #[arg(long, default_value_t = 384)]
    hs_tile: usize,
    #[arg(long, default_value_t = 2304)]
    pan_tile: usize,
    #[arg(long, default_value_t = 6)]
    ratio: usize,
    /// Also simulate reduced-resolution triplets.
    #[arg(long)]
    rr: bool,
    /// Degrade with an ideal low-pass filter instead of the MTF Gaussian.
    #[arg(long)]
    no_mtf: bool,
    #[arg(long, default_value_t = MtfSpec::DEFAULT_GAIN)]
    gnyq: f64,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Drop tiles whose valid fraction over kept bands is below this value.
    #[arg(long)]
    min_valid_fraction: Option<f64>,
}

#[derive(Args)]
struct SharpenArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    pan: PathBuf,
    #[arg(long)]
    hs: PathBuf,
    #[arg(long, default_value_t = 6)]
    ratio: usize,
    #[arg(long, default_value_t = MtfSpec::DEFAULT_GAIN)]
    gnyq: f64,
    #[arg(long)]
    out: PathBuf,
    /// Set negative reflectance to zero in the written cube.
    #[arg(long)]
    clamp_negative: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    protocol: Protocol,
    #[arg(long)]
    manifest: PathBuf,
    /// Built-in method (exp, pca, gsa); repeatable.
    #[arg(long = "method")]
    methods: Vec<Method>,
    /// Directory of fused results as `<DIR>/<tile id>/`, optionally `NAME=DIR`; repeatable.
    #[arg(long = "import")]
    imports: Vec<String>,
    #[arg(long, default_value_t = MtfSpec::DEFAULT_GAIN)]
    gnyq: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0 / 6.0)]
    h_over_l: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// HS tile size as `H,W`.
    #[arg(long, value_parser = parse_pair::<usize>, default_value = "64,64")]
    size: (usize, usize),
    #[arg(long, default_value_t = 16)]
    bands: usize,
    #[arg(long, default_value_t = 6)]
    ratio: usize,
    #[arg(long, default_value_t = 1)]
    tiles: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    cube: PathBuf,
    /// Red, green and blue target wavelengths in nm.
    #[arg(long, value_parser = parse_triple, default_value = "641,563,478")]
    wavelengths: [f64; 3],
    /// Lower and upper percentile.
    #[arg(long, value_parser = parse_pair::<f64>, default_value = "1,99")]
    stretch: (f64, f64),
    /// Crop as `x,y,w,h` before stretching.
    #[arg(long, value_parser = parse_roi)]
    roi: Option<Roi>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SignatureArgs {
    #[arg(long)]
    cube: PathBuf,
    /// Region as `x,y,w,h`.
    #[arg(long, value_parser = parse_roi)]
    roi: Roi,
    /// Reference cube; adds per-band differences (the cube is degraded to the
    /// reference grid when sizes differ).
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    ratio: usize,
    #[arg(long, default_value_t = MtfSpec::DEFAULT_GAIN)]
    gnyq: f64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_list<T: std::str::FromStr>(s: &str, n: usize) -> std::result::Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated values, got '{s}'"));
    }
    parts.iter().map(|p| p.parse().map_err(|_| format!("bad number '{p}'"))).collect()
}

fn parse_pair<T: std::str::FromStr + Copy>(s: &str) -> std::result::Result<(T, T), String> {
    let v = parse_list::<T>(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_triple(s: &str) -> std::result::Result<[f64; 3], String> {
    let v = parse_list::<f64>(s, 3)?;
    Ok([v[0], v[1], v[2]])
}

fn parse_roi(s: &str) -> std::result::Result<Roi, String> {
    let v = parse_list::<usize>(s, 4)?;
    Ok(Roi::new(v[0], v[1], v[2], v[3]))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|source| Error::Io { path: path.into(), source })
}

/// Runs a subcommand; `Ok(true)` means some tiles failed.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Prepare(a) => {
            let cfg = PrepareConfig {
                invalid_threshold: a.invalid_threshold,
                hs_tile: a.hs_tile,
                pan_tile: a.pan_tile,
                ratio: a.ratio,
                rr: a.rr,
                mtf: !a.no_mtf,
                nyquist_gain: a.gnyq,
                split_seed: a.split_seed,
                test_fraction: a.test_fraction,
                min_valid_fraction: a.min_valid_fraction,
            };
            let manifest = build_dataset(&discover_scenes(&a.scenes)?, &cfg, &a.out)?;
            let kept = manifest.band_mask.iter().filter(|&&k| k).count();
            println!("{} tiles, {kept} of {} bands kept", manifest.tiles.len(), manifest.band_mask.len());
        }
        Command::Sharpen(a) => {
            let pan = load_pan(&a.pan)?;
            let hs = load_cube(&a.hs)?;
            let req = SharpenRequest::new(&pan, &hs, MtfSpec::new(a.gnyq, a.ratio)?)?;
            let mut fused = a.method.sharpen(&req)?;
            if a.clamp_negative {
                fused = clamp_negative(&fused)?;
            }
            store_cube(&a.out, &fused)?;
        }
        Command::Eval(a) => {
            let mut methods: Vec<MethodSpec> = a.methods.into_iter().map(MethodSpec::Builtin).collect();
            methods.extend(a.imports.iter().map(|s| MethodSpec::import(s)));
            let cfg = RunConfig {
                manifest: a.manifest,
                protocol: a.protocol,
                methods,
                h_over_l: a.h_over_l,
                nyquist_gain: a.gnyq,
                alpha: a.alpha,
                beta: a.beta,
                workers: a.workers,
            };
            let report = run(&cfg)?;
            emit(&report, a.format, &a.out)?;
            for f in &report.failures {
                eprintln!("failed: {} / {}: {}", f.tile, f.method, f.error);
            }
            return Ok(!report.failures.is_empty());
        }
        Command::Synth(a) => {
            let cfg = SynthConfig { seed: a.seed, hs_size: a.size, bands: a.bands, ratio: a.ratio, tiles: a.tiles };
            let manifest = write_synth_dataset(&cfg, &a.out)?;
            println!("{} synthetic tiles", manifest.tiles.len());
        }
        Command::Render(a) => {
            let cube = load_cube(&a.cube)?;
            write_png(&a.out, &composite(&cube, a.wavelengths, a.stretch, a.roi)?)?;
        }
        Command::Signature(a) => {
            let cube = load_cube(&a.cube)?;
            let mut doc = json!({
                "roi": a.roi,
                "wavelengths_nm": cube.meta().wavelengths,
                "signature": extract_signature(&cube, a.roi)?,
            });
            if let Some(path) = &a.reference {
                let reference = load_cube(path)?;
                let spec = MtfSpec::new(a.gnyq, a.ratio)?;
                doc["difference"] = json!(signature_difference_at_reference(&cube, &reference, &spec)?);
            }
            write_json(&a.out, &doc)?;
        }
    }
    Ok(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
