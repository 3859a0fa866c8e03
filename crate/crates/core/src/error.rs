use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("loss {value} at index {index} is outside [0, 1]")]
    LossOutOfRange { index: usize, value: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("distribution has empty support")]
    EmptySupport,

    #[error("q is not absolutely continuous w.r.t. p at index {index}")]
    SupportViolation { index: usize },

    #[error("horizon must be at least 1, got {0}")]
    InvalidHorizon(usize),

    #[error("round must be at least 1, got {0}")]
    InvalidRound(usize),

    #[error("invalid interval [{start}, {end}]")]
    InvalidInterval { start: usize, end: usize },

    #[error("invalid learning rate: {0}")]
    InvalidRate(String),

    #[error("need at least {needed} experts, got {got}")]
    TooFewExperts { needed: usize, got: usize },

    #[error("expert set is empty")]
    EmptyExpertSet,

    #[error("expert index {index} out of range for K = {experts}")]
    ExpertOutOfRange { index: usize, experts: usize },

    #[error("comparator set has zero prior mass")]
    ZeroPriorMass,

    #[error("no weights supplied for active box [{start}, {end}]")]
    MissingBoxWeights { start: usize, end: usize },

    #[error("weight routes disagree by {gap:e} (tolerance {tolerance:e})")]
    RouteDisagreement { gap: f64, tolerance: f64 },

    #[error("round {round} is beyond the horizon {horizon}")]
    PastHorizon { round: usize, horizon: usize },

    #[error("invalid environment spec: {0}")]
    InvalidSpec(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("records do not share an environment: {0}")]
    MismatchedEnvironments(String),

    #[error("round {round}: {source}")]
    AtRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("config error at line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_round(self, round: usize) -> Error {
        match self {
            e @ Error::AtRound { .. } => e,
            e => Error::AtRound {
                round,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
