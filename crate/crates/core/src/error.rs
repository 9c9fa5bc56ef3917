use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("fusion predicate `{0}` is empty")]
    EmptyPredicate(String),
    #[error("color mismatch: {0}")]
    ColorMismatch(String),
    #[error("not a lasso: {0}")]
    NotALasso(String),
    #[error("not a hierarchical lasso: {0}")]
    NotAKLasso(String),
    #[error("oracle bound exceeded: {states} states > {bound}")]
    OverBound { states: usize, bound: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("rank {rank} exceeds configured bound {bound}")]
    RankTooHigh { rank: usize, bound: usize },
    #[error("structure with {size} elements exceeds guard {bound} at rank {rank}")]
    StructureTooLarge { size: usize, bound: usize, rank: usize },
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("element is not composable: {0}")]
    NotComposable(String),
    #[error("conjugacy is not an equivalence relation: {0}")]
    NotEquivalence(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("chain verification failed: {0}")]
    VerifyFailed(String),
    #[error("unsupported level: {0}")]
    LevelUnsupported(String),
    #[error("not recognized: {0}")]
    NotRecognized(String),
    #[error("missing representative for {0}")]
    MissingRepresentative(String),
}

impl Error {
    /// True for errors raised by size or rank guards.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::RankTooHigh { .. }
                | Error::StructureTooLarge { .. }
                | Error::GuardExceeded(_)
                | Error::OverBound { .. }
        )
    }
}
