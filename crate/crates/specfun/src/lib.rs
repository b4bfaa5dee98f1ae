//! Special functions of real and complex argument.
//!
//! Everything here is a pure function. Complex values use [`num_complex::Complex64`].

mod erf;
mod gamma;
mod hyper;
mod laguerre;
mod series;

pub use erf::{erf_complex, erfi_complex, faddeeva_w};
pub use gamma::{gamma_real, lgamma_real, rgamma_real};
pub use hyper::{appell_f1_terminating, hyp2f1_complex, hyp2f1_regularized};
pub use laguerre::{laguerre_generalized, laguerre_scaled};
pub use num_complex::Complex64;
pub use series::{MAX_TERMS, SERIES_EPS};

/// Alias used throughout the API for complex arguments and results.
pub type ComplexValue = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecfunError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series did not converge within {terms} terms")]
    Convergence { terms: usize },
    #[error("argument {z} lies within {distance:e} of the branch cut [1, inf)")]
    NearSingular { z: Complex64, distance: f64 },
}

pub type Result<T> = std::result::Result<T, SpecfunError>;
