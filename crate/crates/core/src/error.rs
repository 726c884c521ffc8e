use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A raster or metadata invariant does not hold.
    InvalidMeta(String),
    /// Declared geometry and payload length disagree.
    PayloadSizeMismatch { expected: usize, actual: usize },
    /// A sample that must be finite is NaN or infinite.
    NonFinite { band: usize, index: usize },
    /// Two rasters that must share a geometry do not.
    GeometryMismatch(String),
    /// Dimensions are not divisible by the resampling ratio.
    NonDivisible { width: usize, height: usize, ratio: usize },
    /// The raster is smaller than the filter support.
    TooSmall { width: usize, height: usize, needed: usize },
    /// Filter parameters are out of range.
    InvalidFilter(String),
    /// A statistic that needs spread was computed on constant data.
    ZeroVariance(&'static str),
    /// A regression target has no variance around its mean.
    DegenerateRegression,
    /// A reference band has zero mean so ERGAS is undefined.
    ZeroMeanBand(usize),
    /// Every pixel, block or band was excluded from an aggregate.
    NothingValid(&'static str),
    /// Band cleaning removed every band.
    AllBandsRemoved,
    /// The scene cannot hold a single tile.
    SceneTooSmall,
    /// Invalid argument outside the categories above.
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMeta(msg) => write!(f, "invalid metadata: {msg}"),
            Error::PayloadSizeMismatch { expected, actual } => write!(
                f,
                "payload size mismatch: expected {expected} samples, found {actual}"
            ),
            Error::NonFinite { band, index } => {
                write!(f, "non-finite sample in band {band} at index {index}")
            }
            Error::GeometryMismatch(msg) => write!(f, "geometry mismatch: {msg}"),
            Error::NonDivisible { width, height, ratio } => write!(
                f,
                "non-divisible dimensions: {width}x{height} by ratio {ratio}"
            ),
            Error::TooSmall { width, height, needed } => write!(
                f,
                "band {width}x{height} smaller than kernel radius {needed}"
            ),
            Error::InvalidFilter(msg) => write!(f, "invalid filter: {msg}"),
            Error::ZeroVariance(what) => write!(f, "zero variance: {what}"),
            Error::DegenerateRegression => {
                write!(f, "degenerate regression: target has zero variance")
            }
            Error::ZeroMeanBand(b) => write!(f, "reference band {b} has zero mean"),
            Error::NothingValid(what) => write!(f, "no valid {what}"),
            Error::AllBandsRemoved => write!(f, "band cleaning removed all bands"),
            Error::SceneTooSmall => write!(f, "scene smaller than one tile"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
