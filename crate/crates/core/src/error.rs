use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed arguments that violate an operation's preconditions.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate spectrum: all strengths are zero")]
    DegenerateSpectrum,

    #[error("degenerate target: reference norm is zero")]
    DegenerateTarget,

    /// A time integrator produced a non-finite value.
    #[error("solver blow-up after {steps} steps")]
    SolverBlowup { steps: usize },

    #[error("iterative solver failed to converge after {iterations} iterations (relative residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    /// Training produced a NaN or infinite loss.
    #[error("non-finite loss at epoch {epoch}")]
    NonFinite { epoch: usize },

    /// Malformed binary file. `offset` is the byte position where decoding failed.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status: 2 for usage, config and file problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverBlowup { .. } | Error::Convergence { .. } | Error::NonFinite { .. } | Error::DegenerateSpectrum => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
