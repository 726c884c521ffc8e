//! Deterministic raster kernels shared by the pipeline, sharpeners and metrics.
//!
//! All boundaries use half-sample symmetric reflection (`d c b a | a b c d`).
//! Decimation samples the center of each `ratio`-sized block, at offset
//! `ratio / 2`, and [`upsample_interp`] is registered on the same phase so that
//! degrading an interpolated band lands back on the original samples.

mod eigen;
mod filter;
mod kernel;
mod lstsq;
mod stats;

pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use filter::{convolve_reflect, decimate, degrade, reflect_index, upsample_interp, Degradation};
pub use kernel::{
    default_kernel_size, high_pass_kernel, ideal_lowpass_kernel, mtf_gaussian_kernel, mtf_sigma,
    Kernel2D, MtfSpec,
};
pub use lstsq::{least_squares, LeastSquaresFit, Matrix, Regression};
pub use stats::{covariance, histogram_match_linear, mean, mean_std, variance};
