use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("preference vectors have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },

    #[error("at least {min} arms are required, got {got}")]
    TooFewArms { min: usize, got: usize },

    #[error("at least 2 players are required, got {0}")]
    TooFewPlayers(usize),

    #[error("weight {value} at index {index} is negative")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}, expected total {total}")]
    TotalMismatch { sum: f64, total: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("diagonal entry ({index},{index}) is {value}, must be zero")]
    NonZeroDiagonal { index: usize, value: f64 },

    #[error("matrix total is {total}, sampling requires 1")]
    TotalNotOne { total: f64 },

    #[error("popularity of arm {arm} is {popularity}, exceeds total {total}")]
    PopularityExceedsTotal { arm: usize, popularity: f64, total: f64 },

    #[error("two-arm instance requires both popularities equal to the total, got {popularity:?}")]
    InfeasibleTwoArm { popularity: [f64; 2] },

    #[error("row/column fill preconditions violated: {0}")]
    CaseDispatchFailure(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("all off-diagonal preference products vanish")]
    DegenerateProduct,

    #[error("tuple {0:?} repeats an arm")]
    NonDistinctKey(Vec<usize>),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::TooFewArms { .. } => "too_few_arms",
            Error::TooFewPlayers(_) => "too_few_players",
            Error::NegativeWeight { .. } => "negative_weight",
            Error::TotalMismatch { .. } => "total_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonZeroDiagonal { .. } => "non_zero_diagonal",
            Error::TotalNotOne { .. } => "total_not_one",
            Error::PopularityExceedsTotal { .. } => "popularity_exceeds_total",
            Error::InfeasibleTwoArm { .. } => "infeasible_two_arm",
            Error::CaseDispatchFailure(_) => "case_dispatch_failure",
            Error::NotApplicable(_) => "not_applicable",
            Error::DimensionTooLarge { .. } => "dimension_too_large",
            Error::DegenerateProduct => "degenerate_product",
            Error::NonDistinctKey(_) => "non_distinct_key",
            Error::Invariant(_) => "invariant",
            Error::Parse(_) => "parse",
        }
    }

    /// True for failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_) | Error::CaseDispatchFailure(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
