use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element does not belong to group {spec}")]
    SpecMismatch { spec: String },

    #[error("invalid group specification: {0}")]
    InvalidSpec(String),

    #[error("integer overflow in group arithmetic")]
    Overflow,

    #[error("letter {letter} out of range for rank {rank}")]
    LetterOutOfRange { letter: i32, rank: usize },

    #[error("level {level} out of range (1..={max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("support cap of {cap} atoms exceeded (last completed step: {completed})")]
    SupportCap { cap: usize, completed: usize },

    #[error("closure cap of {cap} elements exceeded")]
    ClosureCap { cap: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tolerance {tol} unreachable within {max_terms} series terms")]
    ToleranceUnreachable { tol: f64, max_terms: usize },

    #[error("induced measure leaked mass {leaked} above tolerance {tol} at horizon {horizon}")]
    TailMass { leaked: f64, tol: f64, horizon: usize },

    #[error("comparison could not be certified: {0}")]
    Undecided(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("at {point}: {source}")]
    GridPoint { point: String, source: Box<Error> },
}

impl Error {
    pub fn at(self, point: impl Into<String>) -> Error {
        Error::GridPoint { point: point.into(), source: Box::new(self) }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
