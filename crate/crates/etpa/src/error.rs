use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum EtpaError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("under-resolved quadrature: norm of {what} is {norm} (tolerance {tol:e})")]
    Resolution { what: String, norm: f64, tol: f64 },
    #[error("spectral grid too narrow: {0}")]
    Coverage(String),
    #[error("wavefunctions live on different grids")]
    GridMismatch,
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("norm drift {drift:e} exceeds {limit:e}; try dt <= {suggested_dt:e}")]
    StepSize { drift: f64, limit: f64, suggested_dt: f64 },
    #[error("series for ν = {nu} failed at (n, l) = ({n}, {l}): {reason}")]
    Series { nu: usize, n: usize, l: usize, reason: String },
    #[error("all excited populations vanish, selectivity undefined")]
    Degenerate,
    #[error(transparent)]
    Special(#[from] specfun::SpecfunError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl EtpaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EtpaError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, EtpaError>;
