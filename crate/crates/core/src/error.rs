use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("function value is not finite at x = {at} (got {value})")]
    NonFinite { at: f64, value: f64 },

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("no sign change on [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("maximum of {what} sits on the bracket edge at {at}")]
    EdgeMaximum { what: &'static str, at: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("layer index {index} out of range for a {layers}-layer plan")]
    LayerIndex { index: usize, layers: usize },

    #[error("degenerate two-slot block: effective channel gain is zero")]
    DegenerateBlock,

    #[error("could not start worker pool: {0}")]
    WorkerPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}
