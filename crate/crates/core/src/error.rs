use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter violates its sign or range constraint.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Critical ratio (r - c)/(r + h) is undefined because r + h = 0.
    #[error(
        "critical ratio undefined for product {product}: retail price plus holding cost is zero"
    )]
    CriticalRatioUndefined { product: u8 },

    /// The feasible policy region is not finite.
    #[error("feasible region is unbounded: {0}")]
    UnboundedRegion(&'static str),

    /// An operation requires both order quantities to be at least 1.
    #[error("order quantities must both be at least 1, got ({q1}, {q2})")]
    QuantityOutOfDomain { q1: u32, q2: u32 },

    /// Series truncation tolerance must be positive and finite.
    #[error("truncation tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    /// Monte Carlo estimation needs at least two replications.
    #[error("replication count must be at least 2, got {0}")]
    TooFewReplications(u64),

    /// The balance-equation linear system could not be solved.
    #[error("balance equations produced a singular system")]
    SingularBalanceSystem,
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
