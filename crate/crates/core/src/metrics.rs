//! Reduced-resolution (with reference) and full-resolution (no reference)
//! quality indices.
//!
//! All statistics are population statistics. Aggregates are accumulated in a
//! fixed order (band index, then blocks in row-major order) so results are
//! reproducible bit for bit.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;
use crate::raster::{convolve_reflect, high_pass_kernel, Degradation, MtfSpec, Regression};
use crate::types::{Grid, HyperCube, PanImage};

/// Scores of the reduced-resolution protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RrScores {
    pub ergas: f64,
    pub sam_deg: f64,
    pub scc: f64,
    /// Mean per-band UQI, reported in place of the hypercomplex Q2^n.
    pub q_avg: f64,
}

/// Scores of the full-resolution protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrScores {
    pub d_lambda: f64,
    pub d_s: f64,
    pub qnr: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl FrScores {
    /// Builds the score set; QNR is always derived from the two distortions.
    pub fn new(d_lambda: f64, d_s: f64, alpha: f64, beta: f64) -> Self {
        Self { d_lambda, d_s, qnr: qnr(d_lambda, d_s, alpha, beta), alpha, beta }
    }
}

/// How UQI statistics are pooled over a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UqiMode {
    /// One set of statistics over the whole band.
    Global,
    /// Mean over square blocks. A block side larger than the band is
    /// clipped to the band; trailing partial blocks are not scored.
    Blocks { size: usize, stride: usize },
}

impl Default for UqiMode {
    fn default() -> Self {
        UqiMode::Blocks { size: 32, stride: 32 }
    }
}

fn check_same_grid(x: &Grid, y: &Grid) -> Result<()> {
    if !x.same_shape(y) {
        return Err(Error::GeometryMismatch(format!(
            "{}x{} vs {}x{}",
            x.width(),
            x.height(),
            y.width(),
            y.height()
        )));
    }
    Ok(())
}

fn check_same_cube(x: &HyperCube, y: &HyperCube) -> Result<()> {
    if x.width() != y.width() || x.height() != y.height() || x.bands() != y.bands() {
        return Err(Error::GeometryMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            x.width(),
            x.height(),
            x.bands(),
            y.width(),
            y.height(),
            y.bands()
        )));
    }
    Ok(())
}

/// Root mean squared difference.
pub fn rmse(x: &Grid, y: &Grid) -> Result<f64> {
    check_same_grid(x, y)?;
    Ok(rmse_slices(x.data(), y.data()))
}

fn rmse_slices(x: &[f64], y: &[f64]) -> f64 {
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    math::sqrt(ss / x.len() as f64)
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Relative dimensionless global error; `h_over_l` is the ratio of the PAN
/// to the HS ground-sample distance (1/6 here).
pub fn ergas(x: &HyperCube, y: &HyperCube, h_over_l: f64) -> Result<f64> {
    check_same_cube(x, y)?;
    let mut acc = 0.0;
    for b in 0..x.bands() {
        let (xb, yb) = (x.band_grid(b), y.band_grid(b));
        let mu = mean_of(yb.data());
        if mu == 0.0 {
            return Err(Error::ZeroMeanBand(b));
        }
        let rel = rmse_slices(xb.data(), yb.data()) / mu;
        acc += rel * rel;
    }
    Ok(100.0 * h_over_l * math::sqrt(acc / x.bands() as f64))
}

/// Mean spectral angle with the number of pixels excluded for zero norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAngle {
    pub mean_deg: f64,
    pub excluded: usize,
}

/// Angle between two vectors, via the difference and sum of their unit
/// vectors; unlike `acos` of the cosine it stays exact near zero.
fn angle_between(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = math::sqrt(a.iter().map(|v| v * v).sum());
    let nb = math::sqrt(b.iter().map(|v| v * v).sum());
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let (mut diff, mut sum) = (0.0, 0.0);
    for (u, v) in a.iter().zip(b) {
        let (p, q) = (u / na, v / nb);
        diff += (p - q) * (p - q);
        sum += (p + q) * (p + q);
    }
    Some(2.0 * math::atan2(math::sqrt(diff), math::sqrt(sum)))
}

pub fn sam_detail(x: &HyperCube, y: &HyperCube) -> Result<SpectralAngle> {
    check_same_cube(x, y)?;
    let pixels = x.meta().pixels();
    let bands = x.bands();
    let (mut a, mut b) = (alloc::vec![0.0; bands], alloc::vec![0.0; bands]);
    let (mut total, mut counted, mut excluded) = (0.0, 0usize, 0usize);
    for p in 0..pixels {
        for k in 0..bands {
            a[k] = x.band(k)[p] as f64;
            b[k] = y.band(k)[p] as f64;
        }
        match angle_between(&a, &b) {
            Some(angle) => {
                total += angle;
                counted += 1;
            }
            None => excluded += 1,
        }
    }
    if counted == 0 {
        return Err(Error::NothingValid("pixels for SAM"));
    }
    Ok(SpectralAngle { mean_deg: total / counted as f64 * 180.0 / PI, excluded })
}

/// Mean spectral angle in degrees.
pub fn sam(x: &HyperCube, y: &HyperCube) -> Result<f64> {
    sam_detail(x, y).map(|s| s.mean_deg)
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean_of(x), mean_of(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / math::sqrt(sxx * syy))
}

/// Correlation of high-pass details for one band pair; `None` when either
/// filtered band is constant.
pub fn scc_band(x: &Grid, y: &Grid) -> Result<Option<f64>> {
    check_same_grid(x, y)?;
    let f = high_pass_kernel();
    let (fx, fy) = (convolve_reflect(x, &f)?, convolve_reflect(y, &f)?);
    Ok(pearson(fx.data(), fy.data()))
}

/// Spatial correlation coefficient averaged over bands.
pub fn scc(x: &HyperCube, y: &HyperCube) -> Result<f64> {
    check_same_cube(x, y)?;
    let mut values = Vec::with_capacity(x.bands());
    for b in 0..x.bands() {
        if let Some(v) = scc_band(&x.band_grid(b), &y.band_grid(b))? {
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::NothingValid("bands for SCC"));
    }
    Ok(mean_of(&values))
}

/// UQI of one window given its pixel accessor; `None` for degenerate windows.
fn uqi_window(x: &Grid, y: &Grid, r0: usize, c0: usize, h: usize, w: usize) -> Option<f64> {
    let n = (h * w) as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for r in r0..r0 + h {
        for c in c0..c0 + w {
            sx += x.get(r, c);
            sy += y.get(r, c);
        }
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut vxx, mut vyy, mut vxy) = (0.0, 0.0, 0.0);
    for r in r0..r0 + h {
        for c in c0..c0 + w {
            let (a, b) = (x.get(r, c) - mx, y.get(r, c) - my);
            vxx += a * a;
            vyy += b * b;
            vxy += a * b;
        }
    }
    let (vxx, vyy, vxy) = (vxx / n, vyy / n, vxy / n);
    let (sdx, sdy) = (math::sqrt(vxx), math::sqrt(vyy));
    let lum_den = mx * mx + my * my;
    if sdx * sdy == 0.0 || lum_den == 0.0 {
        return None;
    }
    let correlation = vxy / (sdx * sdy);
    let luminance = 2.0 * mx * my / lum_den;
    let contrast = 2.0 * sdx * sdy / (vxx + vyy);
    Some(correlation * luminance * contrast)
}

/// UQI over one band, `None` if every window is degenerate.
fn uqi_opt(x: &Grid, y: &Grid, mode: UqiMode) -> Option<f64> {
    match mode {
        UqiMode::Global => uqi_window(x, y, 0, 0, x.height(), x.width()),
        UqiMode::Blocks { size, stride } => {
            let bh = size.min(x.height());
            let bw = size.min(x.width());
            let stride = stride.max(1);
            let (mut total, mut count) = (0.0, 0usize);
            let mut r = 0;
            while r + bh <= x.height() {
                let mut c = 0;
                while c + bw <= x.width() {
                    if let Some(q) = uqi_window(x, y, r, c, bh, bw) {
                        total += q;
                        count += 1;
                    }
                    c += stride;
                }
                r += stride;
            }
            (count > 0).then(|| total / count as f64)
        }
    }
}

/// Universal image quality index of `x` against reference `y`.
pub fn uqi(x: &Grid, y: &Grid, mode: UqiMode) -> Result<f64> {
    check_same_grid(x, y)?;
    uqi_opt(x, y, mode).ok_or(Error::NothingValid("blocks"))
}

fn q_avg_bands(pairs: impl Iterator<Item = Result<(Grid, Grid)>>) -> Result<f64> {
    let mut values = Vec::new();
    for pair in pairs {
        let (x, y) = pair?;
        check_same_grid(&x, &y)?;
        if let Some(q) = uqi_opt(&x, &y, UqiMode::default()) {
            values.push(q);
        }
    }
    if values.is_empty() {
        return Err(Error::NothingValid("bands for Q"));
    }
    Ok(mean_of(&values))
}

/// Mean block-mode UQI over bands; bands with no valid block are left out.
pub fn q_avg(x: &HyperCube, y: &HyperCube) -> Result<f64> {
    check_same_cube(x, y)?;
    q_avg_bands((0..x.bands()).map(|b| Ok((x.band_grid(b), y.band_grid(b)))))
}

/// Spectral distortion: one minus the mean UQI between the MTF-degraded fused
/// bands and the input HS bands.
pub fn d_lambda(fused: &HyperCube, hs_input: &HyperCube, spec: &MtfSpec) -> Result<f64> {
    let r = spec.ratio;
    if fused.width() != r * hs_input.width()
        || fused.height() != r * hs_input.height()
        || fused.bands() != hs_input.bands()
    {
        return Err(Error::GeometryMismatch(format!(
            "fused {}x{}x{} is not {r}x input {}x{}x{}",
            fused.width(),
            fused.height(),
            fused.bands(),
            hs_input.width(),
            hs_input.height(),
            hs_input.bands()
        )));
    }
    let degradation = Degradation::mtf(spec)?;
    let q = q_avg_bands((0..fused.bands()).map(|b| {
        Ok((degradation.apply(&fused.band_grid(b))?, hs_input.band_grid(b)))
    }))?;
    Ok(1.0 - q)
}

/// Spatial distortion: one minus the R^2 of regressing the PAN on the fused
/// bands (with intercept).
pub fn d_s(fused: &HyperCube, pan: &PanImage) -> Result<f64> {
    if fused.width() != pan.width() || fused.height() != pan.height() {
        return Err(Error::GeometryMismatch(format!(
            "fused {}x{} vs PAN {}x{}",
            fused.width(),
            fused.height(),
            pan.width(),
            pan.height()
        )));
    }
    let bands = fused.bands();
    let mut reg = Regression::new(bands, true);
    let mut row = alloc::vec![0.0; bands];
    for (p, &target) in pan.samples().iter().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = fused.band(b)[p] as f64;
        }
        reg.push(&row, target as f64);
    }
    let fit = reg.finish()?;
    fit.r_squared.map(|r2| 1.0 - r2).ok_or(Error::DegenerateRegression)
}

/// `(1 - d_lambda)^alpha * (1 - d_s)^beta`.
pub fn qnr(d_lambda: f64, d_s: f64, alpha: f64, beta: f64) -> f64 {
    math::pow(1.0 - d_lambda, alpha) * math::pow(1.0 - d_s, beta)
}

/// All reduced-resolution scores of `fused` against `reference`.
pub fn score_rr(fused: &HyperCube, reference: &HyperCube, h_over_l: f64) -> Result<RrScores> {
    check_same_cube(fused, reference)?;
    Ok(RrScores {
        ergas: ergas(fused, reference, h_over_l)?,
        sam_deg: sam(fused, reference)?,
        scc: scc(fused, reference)?,
        q_avg: q_avg(fused, reference)?,
    })
}

/// All full-resolution scores.
pub fn score_fr(
    fused: &HyperCube,
    pan: &PanImage,
    hs_input: &HyperCube,
    spec: &MtfSpec,
    alpha: f64,
    beta: f64,
) -> Result<FrScores> {
    let dl = d_lambda(fused, hs_input, spec)?;
    let ds = d_s(fused, pan)?;
    Ok(FrScores::new(dl, ds, alpha, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::RasterMeta;

    fn cube(w: usize, h: usize, bands: &[Vec<f64>]) -> HyperCube {
        let wl: Vec<f64> = (0..bands.len()).map(|i| 500.0 + i as f64).collect();
        let meta = RasterMeta::new(w, h, 30.0, wl).unwrap();
        let samples = bands.iter().flatten().map(|&v| v as f32).collect();
        HyperCube::new(meta, samples).unwrap()
    }

    fn grid(v: &[f64]) -> Grid {
        Grid::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&grid(&[1.0, 2.0]), &grid(&[1.0, 2.0])).unwrap(), 0.0);
        let v = rmse(&grid(&[0.0, 0.0]), &grid(&[3.0, 4.0])).unwrap();
        assert!((v - 12.5f64.sqrt()).abs() < 1e-12);
        assert!(rmse(&grid(&[0.0]), &grid(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn ergas_examples() {
        let y = cube(2, 2, &[vec![1.0, 2.0, 3.0, 4.0]]);
        assert_eq!(ergas(&y, &y, 1.0 / 6.0).unwrap(), 0.0);
        // Constant offset 0.15 on a band of mean 2.5: RMSE = 0.06 mean.
        let x = cube(2, 2, &[vec![1.15, 2.15, 3.15, 4.15]]);
        let e = ergas(&x, &y, 1.0 / 6.0).unwrap();
        assert!((e - 1.0).abs() < 1e-6, "{e}");
        let zero = cube(2, 1, &[vec![1.0, -1.0]]);
        assert_eq!(ergas(&zero, &zero, 1.0).unwrap_err(), Error::ZeroMeanBand(0));
    }

    #[test]
    fn sam_examples() {
        let x = cube(2, 1, &[vec![1.0, 0.5], vec![2.0, 3.0]]);
        let y = cube(2, 1, &[vec![2.0, 1.0], vec![4.0, 6.0]]);
        assert_eq!(sam(&x, &y).unwrap(), 0.0);
        let a = cube(1, 1, &[vec![1.0], vec![0.0]]);
        let b = cube(1, 1, &[vec![0.0], vec![1.0]]);
        assert!((sam(&a, &b).unwrap() - 90.0).abs() < 1e-12);
        let c = cube(1, 1, &[vec![1.0], vec![1.0]]);
        assert!((sam(&c, &a).unwrap() - 45.0).abs() < 1e-9);
        assert!(sam(&x, &x).unwrap() == 0.0);
    }

    #[test]
    fn sam_excludes_zero_spectra() {
        let x = cube(2, 1, &[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let y = cube(2, 1, &[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let s = sam_detail(&x, &y).unwrap();
        assert_eq!(s.excluded, 1);
        assert!((s.mean_deg - 45.0).abs() < 1e-9);
        let z = cube(1, 1, &[vec![0.0], vec![0.0]]);
        assert!(matches!(sam(&z, &z), Err(Error::NothingValid(_))));
    }

    #[test]
    fn scc_examples() {
        let v: Vec<f64> = (0..16).map(|i| ((i * 7) % 5) as f64).collect();
        let x = cube(4, 4, core::slice::from_ref(&v));
        assert!((scc(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let y = cube(4, 4, &[v.iter().map(|a| 2.0 * a + 7.0).collect()]);
        assert!((scc(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let flat = cube(4, 4, &[vec![3.0; 16]]);
        assert!(matches!(scc(&flat, &x), Err(Error::NothingValid(_))));
    }

    #[test]
    fn uqi_examples() {
        let x = grid(&[1.0, 2.0, 3.0, 4.0]);
        assert!((uqi(&x, &x, UqiMode::Global).unwrap() - 1.0).abs() < 1e-12);
        let y = grid(&[2.0, 4.0, 6.0, 8.0]);
        assert!((uqi(&x, &y, UqiMode::Global).unwrap() - 0.64).abs() < 1e-12);
        let c = Grid::filled(32, 32, 1.0);
        assert_eq!(uqi(&c, &c, UqiMode::default()).unwrap_err(), Error::NothingValid("blocks"));
    }

    #[test]
    fn q_avg_skips_degenerate_band() {
        let v: Vec<f64> = (0..16).map(|i| 1.0 + (i % 5) as f64).collect();
        let z: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let neg: Vec<f64> = z.iter().map(|a| -a).collect();
        let x = cube(4, 4, &[v.clone(), z, v.clone()]);
        let y = cube(4, 4, &[v.clone(), neg, v]);
        assert!((q_avg(&x, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qnr_values() {
        assert!((qnr(0.3820, 0.0016, 1.0, 1.0) - 0.6170).abs() < 5e-4);
        assert!((qnr(0.3552, 0.0066, 1.0, 1.0) - 0.6405).abs() < 5e-4);
        assert_eq!(qnr(0.0, 0.0, 1.0, 1.0), 1.0);
        let s = FrScores::new(0.2, 0.1, 1.0, 1.0);
        assert!((s.qnr - 0.72).abs() < 1e-12);
    }

    #[test]
    fn d_s_examples() {
        let b0: Vec<f64> = (0..36).map(|i| ((i * 5) % 7) as f64).collect();
        let b1: Vec<f64> = (0..36).map(|i| ((i * 3) % 11) as f64).collect();
        let fused = cube(6, 6, &[b0.clone(), b1.clone()]);
        let pan: Vec<f32> = b0.iter().zip(&b1).map(|(a, b)| (0.2 * a + 0.8 * b + 3.0) as f32).collect();
        let meta = RasterMeta::new(6, 6, 30.0, alloc::vec![550.0]).unwrap();
        let pan = PanImage::new(meta.clone(), pan).unwrap();
        assert!(d_s(&fused, &pan).unwrap().abs() < 1e-6);
        let flat = PanImage::new(meta, alloc::vec![1.0; 36]).unwrap();
        assert_eq!(d_s(&fused, &flat).unwrap_err(), Error::DegenerateRegression);
    }

    #[test]
    fn d_s_orthogonal_target() {
        // Single band [1,2,3,4] x [1,1]; PAN pattern orthogonal to it and to 1.
        let band = alloc::vec![1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0];
        let fused = cube(4, 2, &[band]);
        let meta = RasterMeta::new(4, 2, 30.0, alloc::vec![550.0]).unwrap();
        let pan = PanImage::new(meta, alloc::vec![1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0]).unwrap();
        assert!((d_s(&fused, &pan).unwrap() - 1.0).abs() < 1e-6);
    }
}
