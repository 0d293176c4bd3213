use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),

    #[error("enumeration of {requested} items exceeds the cap of {cap}")]
    CapExceeded { requested: u128, cap: u128 },

    #[error("singular design: condition number {condition:.3e} exceeds {threshold:.1e}")]
    SingularDesign { condition: f64, threshold: f64 },

    #[error("degenerate projection: zeta1 = {zeta1:.3e} is not above its standard error {se:.3e}")]
    DegenerateProjection { zeta1: f64, se: f64 },

    #[error("degenerate moments: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgs(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgs(_) | Error::Json(_) => 2,
            Error::CapExceeded { .. } => 3,
            Error::SingularDesign { .. } | Error::DegenerateProjection { .. } | Error::Degenerate(_) => 4,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }

    /// True for errors raised by a kernel on a particular subsample, which Monte-Carlo
    /// estimators count and skip instead of aborting.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SingularDesign { .. })
    }
}
