//! Hexagonal-partition thresholds, random geometric graph percolation
//! experiments, and hyperplane-shift anomaly separation in the plane.

pub mod cli;
pub mod error;
pub mod geom;
pub mod mc;
pub mod pipeline;
pub mod rgg;
pub mod sv;
pub mod thresh;

pub use error::{Error, Result};
