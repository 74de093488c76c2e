use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("step {requested} out of range (|n| <= {limit})")]
    StepOutOfRange { requested: i64, limit: i64 },

    #[error("shift offset overflow: {offset} + {step}")]
    OffsetOverflow { offset: i64, step: i64 },

    #[error("operation requires a {expected} base point or system")]
    WrongBaseKind { expected: &'static str },

    #[error("invalid driving system: {0}")]
    InvalidBase(String),

    #[error("singular cocycle factor at index {index}")]
    Singular { index: i64 },

    #[error("cocycle factor at index {index} is ill-conditioned (cond = {cond:.3e})")]
    IllConditioned { index: i64, cond: f64 },

    #[error("margin mu = 0: adapted-norm truncation is not certified without an explicit override")]
    UncertifiedTruncation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("weight is not {r}-admissible at index {index} (ratio {ratio})")]
    Inadmissible { index: i64, ratio: f64, r: f64 },

    #[error("contraction condition violated: q = {q} >= 1")]
    ContractionViolated { q: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last step {last_step:.3e})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("sequence is not an orbit: residual {residual:.3e} at index {index}")]
    NotAnOrbit { index: i64, residual: f64 },

    #[error("inverse of F failed to converge at orbit index {index}")]
    InversionFailed { index: i64 },

    #[error("orbit collapsed to zero at step {step}")]
    DegenerateOrbit { step: i64 },

    #[error("numerical breakdown: {0}")]
    Numerical(String),

    #[error("scenario self-test failed: {0}")]
    SelfTest(String),

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
