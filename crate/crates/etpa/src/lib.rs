//! Second-order perturbative and exact simulations of two-photon vibronic
//! excitation of a diatomic molecule by uncorrelated and frequency-entangled
//! photon pairs.

pub mod alloc;
mod error;
pub mod exact;
pub mod molecule;
pub mod photons;
pub mod pt;
pub mod quadrature;
pub mod units;

pub use error::{EtpaError, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
