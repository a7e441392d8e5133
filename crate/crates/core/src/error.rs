use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-facing configuration (empty input, out-of-range parameter).
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke an operation's precondition (length mismatch, misaligned supports).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("quadrature grid captures only {captured:.8} of the {which} density mass (need >= {required})")]
    QuadratureCoverage {
        which: &'static str,
        captured: f64,
        required: f64,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("subset has zero mass under the target distribution")]
    UndefinedSubset,

    #[error("generator fit failed in round {round}: {reason}")]
    FitFailed { round: usize, reason: String },

    #[error("discriminator training failed in round {round}: {reason}")]
    DiscriminatorFailed { round: usize, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
