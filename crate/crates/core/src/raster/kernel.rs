use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;

/// Gaussian MTF model of the spectral sensor.
///
/// `nyquist_gain` is the amplitude of the sensor MTF at the Nyquist frequency
/// of the coarse grid, `ratio` the scale factor between the fine and coarse
/// grids.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MtfSpec {
    pub nyquist_gain: f64,
    pub ratio: usize,
    pub kernel_size: usize,
}

/// Default window for a ratio: `2 * ceil(10 * ratio / 3) + 1` (41 taps at ratio 6).
pub fn default_kernel_size(ratio: usize) -> usize {
    2 * (10 * ratio).div_ceil(3) + 1
}

impl MtfSpec {
    pub const DEFAULT_GAIN: f64 = 0.3;

    pub fn new(nyquist_gain: f64, ratio: usize) -> Result<Self> {
        Self::with_kernel_size(nyquist_gain, ratio, default_kernel_size(ratio))
    }

    pub fn with_kernel_size(nyquist_gain: f64, ratio: usize, kernel_size: usize) -> Result<Self> {
        let spec = Self { nyquist_gain, ratio, kernel_size };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nyquist_gain > 0.0 && self.nyquist_gain < 1.0) {
            return Err(Error::InvalidFilter(format!(
                "nyquist gain {} outside (0, 1)",
                self.nyquist_gain
            )));
        }
        if self.ratio < 2 {
            return Err(Error::InvalidFilter(format!("ratio {} < 2", self.ratio)));
        }
        if self.kernel_size.is_multiple_of(2) || self.kernel_size < 2 * self.ratio + 1 {
            return Err(Error::InvalidFilter(format!(
                "kernel size {} must be odd and at least {}",
                self.kernel_size,
                2 * self.ratio + 1
            )));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        mtf_sigma(self.nyquist_gain, self.ratio)
    }
}

/// Spatial standard deviation (fine-grid pixels) of the Gaussian whose
/// frequency response `exp(-2 pi^2 sigma^2 f^2)` equals `gain` at
/// `f = 1 / (2 ratio)`.
pub fn mtf_sigma(gain: f64, ratio: usize) -> f64 {
    ratio as f64 * math::sqrt(-2.0 * math::ln(gain)) / PI
}

/// Square convolution kernel, optionally stored with its separable 1-D factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    size: usize,
    coefficients: Vec<f64>,
    factor: Option<Vec<f64>>,
}

impl Kernel2D {
    /// Kernel from a row-major `size x size` coefficient grid.
    pub fn new(size: usize, coefficients: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) || coefficients.len() != size * size {
            return Err(Error::InvalidFilter(format!(
                "kernel needs odd size and size^2 coefficients, got size {size} with {}",
                coefficients.len()
            )));
        }
        Ok(Self { size, coefficients, factor: None })
    }

    /// Outer product `factor * factor^T`.
    pub fn separable(factor: Vec<f64>) -> Result<Self> {
        let size = factor.len();
        if size.is_multiple_of(2) {
            return Err(Error::InvalidFilter(format!("even kernel size {size}")));
        }
        let mut coefficients = Vec::with_capacity(size * size);
        for a in &factor {
            for b in &factor {
                coefficients.push(a * b);
            }
        }
        Ok(Self { size, coefficients, factor: Some(factor) })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.size / 2
    }

    #[inline]
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    #[inline]
    pub fn factor(&self) -> Option<&[f64]> {
        self.factor.as_deref()
    }

    /// Coefficient at row `r`, column `c` of the grid.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.coefficients[r * self.size + c]
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}

/// Separable Gaussian matched to the sensor MTF, normalized to unit sum.
pub fn mtf_gaussian_kernel(spec: &MtfSpec) -> Result<Kernel2D> {
    spec.validate()?;
    let sigma = spec.sigma();
    let radius = spec.kernel_size / 2;
    // Mass of the continuous Gaussian outside the square window.
    let tail_1d = math::erfc((radius as f64 + 0.5) / (sigma * core::f64::consts::SQRT_2));
    let outside = 1.0 - (1.0 - tail_1d) * (1.0 - tail_1d);
    if outside > 1e-3 {
        return Err(Error::InvalidFilter(format!(
            "kernel size {} loses {outside:.2e} of the Gaussian mass (sigma {sigma:.3})",
            spec.kernel_size
        )));
    }
    let mut factor: Vec<f64> = (0..spec.kernel_size)
        .map(|i| {
            let t = i as f64 - radius as f64;
            math::exp(-t * t / (2.0 * sigma * sigma))
        })
        .collect();
    let total: f64 = factor.iter().sum();
    factor.iter_mut().for_each(|v| *v /= total);
    Kernel2D::separable(factor)
}

/// Hamming-windowed sinc low-pass with cutoff at the coarse-grid Nyquist
/// frequency, normalized to unit sum.
pub fn ideal_lowpass_kernel(ratio: usize, kernel_size: usize) -> Result<Kernel2D> {
    if ratio < 2 || kernel_size.is_multiple_of(2) || kernel_size < 2 * ratio + 1 {
        return Err(Error::InvalidFilter(format!(
            "ideal low-pass needs ratio >= 2 and odd size >= {}",
            2 * ratio + 1
        )));
    }
    let radius = kernel_size / 2;
    let cutoff = 1.0 / ratio as f64;
    let mut factor: Vec<f64> = (0..kernel_size)
        .map(|i| {
            let t = i as f64 - radius as f64;
            let x = PI * t * cutoff;
            let sinc = if t == 0.0 { 1.0 } else { math::sin(x) / x };
            let window = 0.54 + 0.46 * math::cos(PI * t / (radius as f64 + 1.0));
            sinc * window
        })
        .collect();
    let total: f64 = factor.iter().sum();
    factor.iter_mut().for_each(|v| *v /= total);
    Kernel2D::separable(factor)
}

/// 3x3 Laplacian-style detail extractor used by SCC; coefficients sum to 0.
pub fn high_pass_kernel() -> Kernel2D {
    Kernel2D::new(3, alloc::vec![-1.0, -1.0, -1.0, -1.0, 8.0, -1.0, -1.0, -1.0, -1.0])
        .expect("static kernel")
}
