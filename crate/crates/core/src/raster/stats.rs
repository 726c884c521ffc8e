use crate::error::{Error, Result};
use crate::math;
use crate::types::Grid;

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance (divides by `n`), two-pass.
pub fn variance(values: &[f64]) -> f64 {
    mean_var(values).1
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    if values.is_empty() {
        return (m, 0.0);
    }
    let v = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / values.len() as f64;
    (m, v)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let (m, v) = mean_var(values);
    (m, math::sqrt(v))
}

/// Population covariance of two equal-length slices.
pub fn covariance(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "covariance of unequal lengths");
    if x.is_empty() {
        return 0.0;
    }
    let (mx, my) = (mean(x), mean(y));
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.len() as f64
}

/// Affine map of `src` onto a target mean and standard deviation.
pub fn histogram_match_linear(src: &Grid, ref_mean: f64, ref_std: f64) -> Result<Grid> {
    let (m, s) = mean_std(src.data());
    if s == 0.0 {
        return Err(Error::ZeroVariance("histogram matching source"));
    }
    let gain = ref_std / s;
    Ok(src.map(|v| (v - m) * gain + ref_mean))
}
