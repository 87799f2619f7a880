use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no actions at terminal")]
    TerminalSequence,
    #[error("illegal action sequence `{0}`")]
    IllegalSequence(String),
    #[error("sequence `{0}` is not terminal")]
    NotTerminal(String),
    #[error("invalid card `{0}`")]
    InvalidCard(String),
    #[error("invalid deal `{0}`")]
    InvalidDeal(String),
    #[error("invalid position {0} (expected 1..=3)")]
    InvalidPosition(i64),
    #[error("invalid situation {0} (expected 1..=4)")]
    InvalidSituation(i64),
    #[error("strategy for position {expected} used at position {found}")]
    PositionMismatch { expected: u8, found: u8 },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("strategy is missing info set {0}")]
    MissingInfoSet(String),
    #[error("inconsistent observation: {0}")]
    InconsistentObservation(String),
    #[error("observation impossible under all samples")]
    ImpossibleObservation,
    #[error("gamma shape must be positive, got {0}")]
    InvalidShape(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown equilibrium point `{0}`")]
    UnknownNashPoint(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("deal schedule has {have} deals but {need} hands were requested")]
    ScheduleTooShort { have: usize, need: usize },
}
