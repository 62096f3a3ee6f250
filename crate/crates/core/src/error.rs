use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("aggregate packing incomplete: reached area fraction {achieved:.4} of target {target:.4}")]
    PackingIncomplete { achieved: f64, target: f64 },

    #[error("linear solve failed at t = {time:.4} yr: relative residual {residual:.3e} after {iterations} iterations")]
    LinearSolveFailure {
        time: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("field has no active cells")]
    EmptyField,

    #[error("depth {depth} mm is outside the profile range [{min}, {max}] mm")]
    DepthOutOfRange { depth: f64, min: f64, max: f64 },

    #[error("insufficient overlap: {found} measured points inside the model depth range, need at least 2")]
    InsufficientOverlap { found: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
