//! File formats, dataset preparation, evaluation and reporting on top of
//! [`hspan_core`].

pub mod container;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod render;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use hspan_core;
