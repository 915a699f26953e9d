use std::path::PathBuf;

/// Errors produced by table loading, policy construction, optimization and
/// configuration handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid mode {mode}: {reason}")]
    InvalidMode { mode: usize, reason: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("integral of 1/snr diverges at a zero lower limit")]
    Divergent,

    #[error("mode {mode} cannot reach target PER {target}: fit amplitude a = {a} is not above the target")]
    UnreachableTarget { mode: usize, target: f64, a: f64 },

    #[error("non-positive threshold denominator for mode {mode} ({value:e})")]
    NonPositiveDenominator { mode: usize, value: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the `carq` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            Error::Parse { .. } => 3,
            Error::InvalidMode { .. }
            | Error::Validation(_)
            | Error::IndexOutOfRange { .. }
            | Error::UnreachableTarget { .. } => 4,
            Error::Infeasible(_) => 5,
            Error::Divergent | Error::NonPositiveDenominator { .. } | Error::Numerical(_) => 6,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}
