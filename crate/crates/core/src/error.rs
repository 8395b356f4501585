use crate::model::{Item, Time};

/// Errors raised by the simulator, the offline search and the constructions built on them.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("request for item {item} at t={time} exceeds the universe size n={n}")]
    ItemOutOfRange { time: Time, item: Item, n: u32 },

    #[error("clock mismatch: engine expects t={expected}, got t={got}")]
    ClockMismatch { expected: Time, got: Time },

    #[error("infeasible eviction at t={time}: item {item} cannot be evicted")]
    InfeasibleEviction { time: Time, item: Item },

    #[error("a caching decision is pending at t={time}")]
    DecisionPending { time: Time },

    #[error("no caching decision is pending")]
    NoDecisionPending,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("instance too large: search explored more than {limit} nodes")]
    BudgetExceeded { limit: u64 },

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("policy '{policy}' hit the adversarial request at t={time} (item {item})")]
    PolicyHit {
        policy: String,
        time: Time,
        item: Item,
    },

    #[error("check '{check}' failed: {detail}")]
    Violation { check: &'static str, detail: String },

    #[error("unknown policy '{0}'")]
    UnknownPolicy(String),

    #[error("trace parse error on line {line}: {detail}")]
    TraceParse { line: usize, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
