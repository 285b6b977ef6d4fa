//! Library-wide error type. Every variant carries a stable machine-readable
//! code so the CLI can map failures to distinct exit codes and one-line
//! reasons.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative probability mass: {0}")]
    NegativeMass(f64),
    #[error("probabilities sum to {0}, not 1")]
    SumNotOne(f64),
    #[error("duplicate atom label: {0}")]
    DuplicateLabel(String),
    #[error("conditioning on zero-mass event: {0}")]
    ZeroMassCondition(String),
    #[error("atoms are missing coordinates: {0}")]
    MissingCoords(String),
    #[error("atom label sets are not alignable: {0}")]
    LabelMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("channels do not share the W-marginal (max deviation {0})")]
    MarginalMismatch(f64),
    #[error("power divergence requires exponent p > 1, got {0}")]
    BadExponent(f64),
    #[error("empty evaluation grid")]
    EmptyGrid,
    #[error("inner interval is not nested in the outer one")]
    NotNested,
    #[error("point outside the net domain: {0}")]
    OutOfDomain(String),
    #[error("level index out of range: {0}")]
    BadLevel(String),
    #[error("no finite tail certificate: {0}")]
    NoTailCap(String),
    #[error("delta must lie in (0,1), got {0}")]
    BadDelta(f64),
    #[error("lambda must be positive, got {0}")]
    BadLambda(f64),
    #[error("alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("schedule depth {depth} exceeds net depth {net}")]
    ScheduleTooDeep { depth: usize, net: usize },
    #[error("posterior levels are not coarsening-consistent: {0}")]
    InconsistentPosterior(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("refining-net validation failed: {0}")]
    NetValidation(String),
}

impl Error {
    /// Stable machine-readable code for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NegativeMass(_) => "NEGATIVE_MASS",
            Error::SumNotOne(_) => "SUM_NOT_ONE",
            Error::DuplicateLabel(_) => "DUPLICATE_LABEL",
            Error::ZeroMassCondition(_) => "ZERO_MASS_CONDITION",
            Error::MissingCoords(_) => "MISSING_COORDS",
            Error::LabelMismatch(_) => "LABEL_MISMATCH",
            Error::DimensionMismatch(_) => "DIMENSION_MISMATCH",
            Error::MarginalMismatch(_) => "MARGINAL_MISMATCH",
            Error::BadExponent(_) => "BAD_EXPONENT",
            Error::EmptyGrid => "EMPTY_GRID",
            Error::NotNested => "NOT_NESTED",
            Error::OutOfDomain(_) => "OUT_OF_DOMAIN",
            Error::BadLevel(_) => "BAD_LEVEL",
            Error::NoTailCap(_) => "NO_TAIL_CAP",
            Error::BadDelta(_) => "BAD_DELTA",
            Error::BadLambda(_) => "BAD_LAMBDA",
            Error::BadAlpha(_) => "BAD_ALPHA",
            Error::ScheduleTooDeep { .. } => "SCHEDULE_TOO_DEEP",
            Error::InconsistentPosterior(_) => "INCONSISTENT_POSTERIOR",
            Error::BadConfig(_) => "BAD_CONFIG",
            Error::NetValidation(_) => "NET_VALIDATION",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
