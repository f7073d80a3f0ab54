use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mean direction is undefined (resultant length below {threshold:e})")]
    UndefinedMeanDirection { threshold: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("sample too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("quadrature failed to converge (estimated error {estimate:e})")]
    QuadratureNoConvergence { estimate: f64 },

    #[error("mean resultant length {0} implies an unbounded concentration")]
    UnboundedConcentration(f64),

    #[error("{replicates} replicates cannot resolve level {alpha}")]
    InsufficientReplicates { replicates: usize, alpha: f64 },

    #[error("empty calibration sample")]
    EmptySample,

    #[error("unsupported distribution family for this test: {0}")]
    UnsupportedFamily(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
