use thiserror::Error;

/// Errors produced by the library. The CLI maps [`Error::Validation`] to
/// exit code 2 and everything else to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("window mismatch: expected [{expected_a},{expected_b}], got [{got_a},{got_b}]")]
    WindowMismatch {
        expected_a: i64,
        expected_b: i64,
        got_a: i64,
        got_b: i64,
    },

    #[error("energy {energy} lies within {distance:e} of the spectrum")]
    Singular { energy: f64, distance: f64 },

    #[error("inverse iteration did not converge (residual {residual:e}, target {target:e})")]
    NoConvergence { residual: f64, target: f64 },

    #[error("expected exactly one eigenvalue in [{lo}, {hi}], found {count}")]
    NotIsolated { lo: f64, hi: f64, count: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("resonant site n = {site}: |V(n) - E0| = {gap:e} below guard {guard:e}")]
    ResonantSite { site: i64, gap: f64, guard: f64 },

    #[error("unsupported for this potential form: {0}")]
    Unsupported(&'static str),

    #[error("bisection failed to bracket a root: {0}")]
    Bracket(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Validation(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
