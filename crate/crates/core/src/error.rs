use thiserror::Error;

/// Errors surfaced by the solver, the diagnostics and the experiment shell.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: expected {expected}^3, found {found}^3")]
    GridMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("blow-up at t = {t}: sup|u| = {sup_u}, admissible dt = {dt} below dt_min")]
    BlowUp { t: f64, sup_u: f64, dt: f64 },

    #[error("check failed: {0}")]
    Check(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
