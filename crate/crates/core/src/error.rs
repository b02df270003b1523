use thiserror::Error;

/// Errors raised by the spider library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root finder hit {iterations} iterations; best bracket [{}, {}]", bracket.0, bracket.1)]
    RootMaxIterations { iterations: usize, bracket: (f64, f64) },

    #[error("nonlinear solve did not converge after {iterations} iterations (residual {residual:e})")]
    Divergence {
        iterations: usize,
        last: Vec<f64>,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("quadrature did not converge: partial sum {partial}, error estimate {estimate:e}")]
    Quadrature { partial: f64, estimate: f64 },

    #[error("integrand is not phi-integrable on leg {leg} (probe at x = {x} gave {value:e})")]
    NotIntegrable { leg: usize, x: f64, value: f64 },

    #[error("non-finite value while evaluating {0}")]
    NonFinite(String),

    #[error("unknown diffusion characteristics '{0}'")]
    UnknownCharacteristics(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
