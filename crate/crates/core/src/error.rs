use thiserror::Error;

/// Errors raised by the numerical and physical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside its domain ({reason})")]
    Domain { quantity: &'static str, value: f64, reason: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature on [{a}, {b}] did not reach tolerance: value {value:e}, \
         error estimate {error:e} after {subdivisions} subdivisions"
    )]
    Integration { a: f64, b: f64, value: f64, error: f64, subdivisions: usize },

    #[error("iteration did not converge after {iterations} steps (last iterate {last:e}, residual {residual:e})")]
    Iteration { iterations: usize, last: f64, residual: f64 },

    #[error("no sign change on [{lo}, {hi}]: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("limit extrapolation did not settle; samples (x, f(x)) = {samples:?}")]
    Extrapolation { samples: Vec<(f64, f64)> },

    #[error("step refinement did not converge: Richardson estimate {estimate:e} exceeds {tol:e} at step {step:e}")]
    StepConvergence { estimate: f64, tol: f64, step: f64 },

    #[error("bracket [{lo}, {hi}] does not straddle the boundary: {detail}")]
    Bracket { lo: f64, hi: f64, detail: String },

    #[error("{operation}: {source}")]
    Context {
        operation: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attach the name of the failing operation to an error.
pub trait ResultExt<T> {
    fn context(self, operation: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, operation: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| Error::Context { operation: operation(), source: Box::new(source) })
    }
}

impl Error {
    /// Innermost error, with all context layers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
