//! Figure pipeline around the `etpa` engines: declarative run specs, scans
//! that write CSV tables and SVG plots, fits, and checksummed manifests.

pub mod analysis;
mod error;
pub mod fit;
pub mod manifest;
pub mod plot;
pub mod scans;
pub mod spec;

pub use error::{CliError, Result};
