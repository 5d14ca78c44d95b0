use thiserror::Error;

/// Errors shared by every layer of the crate.
///
/// `Undecided` is special: it means a certified comparison could not be
/// resolved at the current working precision. Drivers catch it, double the
/// precision and retry; it only escapes to the caller once the precision cap
/// is reached, at which point it is converted into `PrecisionExhausted`.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("precision exhausted while {0} (cap reached)")]
    PrecisionExhausted(String),

    #[error("comparison undecided at current precision while {0}")]
    Undecided(String),

    #[error("map has no orientation-reversing fixed point (f(c) <= c)")]
    NoFixedPoint,

    #[error("point does not satisfy the domain precondition: {0}")]
    NotInDomain(String),

    #[error("budget of {budget} exceeded while {what}")]
    BudgetExceeded { what: String, budget: usize },

    #[error("iterate horizon of {0} exceeded before the requested data was complete")]
    HorizonExceeded(usize),

    #[error("branch budget of {0} exceeded")]
    BranchBudgetExceeded(usize),

    #[error("difference S[{index}] - S[{index_prev}] is not an earlier cutting time")]
    NotACuttingSequence { index: usize, index_prev: usize },

    #[error("kneading map index out of range at position {0} (need Q[j] <= j-1)")]
    IndexOutOfRange(usize),

    #[error("critical orbit hits the critical point at step {0} (superattracting parameter)")]
    Superattracting(usize),

    #[error("parameter search exhausted its budget without certifying the target")]
    NotFound,

    #[error("cyclic cover hypothesis ({condition}) violated: {detail}")]
    HypothesisViolation { condition: &'static str, detail: String },

    #[error("restrictive interval detected (renormalization of period {period}); nest construction stopped")]
    RenormalizationDetected { period: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("coding horizon too short: {0}")]
    InsufficientHorizon(String),

    #[error("interval is not contained in the reference interval")]
    NotContained,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that a retry at higher precision may fix.
    pub fn is_undecided(&self) -> bool {
        matches!(self, Error::Undecided(_))
    }
}
