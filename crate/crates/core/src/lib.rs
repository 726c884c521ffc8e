//! Numerical core of the `hspan` hyperspectral pansharpening toolkit.
//!
//! Everything in this crate is pure computation on in-memory rasters and is
//! `no_std` (with `alloc`). Container IO, dataset assembly on disk, reports and
//! the command line live in the companion `hspan` crate.
//!
//! Module map:
//! - [`types`]: rasters, metadata and the FR/RR evaluation units
//! - [`raster`]: filtering, MTF degradation, interpolation, regression
//! - [`sharpen`]: interpolation baseline, PCA and GSA component substitution
//! - [`metrics`]: ERGAS, SAM, SCC, UQI/Q, D_lambda, D_s and QNR
//! - [`pipeline`]: band cleaning, VNIR/SWIR concatenation, tiling, RR simulation
//! - [`synth`]: seeded synthetic scenes for desk-scale experiments
//! - [`analysis`]: spectral signatures and percentile stretching for renders

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod math;

pub mod analysis;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod sharpen;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    BandMask, Detector, ErrorCube, FrPair, Grid, HyperCube, PanImage, RasterMeta, RrTriplet,
};
