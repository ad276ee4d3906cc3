//! Crate-wide error type.

/// Errors from configuration validation, contract violations and infeasible
/// solver requests.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration field violates its invariant.
    #[error("invalid config field `{field}`: {detail}")]
    InvalidConfig {
        /// Name of the offending field (as it appears in config files).
        field: &'static str,
        /// Human-readable description of the violation.
        detail: String,
    },

    /// A client index outside `0..num_clients` was used.
    #[error("client index {client} out of range (network has {num_clients} clients)")]
    ClientOutOfRange { client: usize, num_clients: usize },

    /// A client that already received its packet this frame was scheduled again.
    #[error("client {client} already delivered in the current frame")]
    AlreadyDelivered { client: usize },

    /// An AoI series of the wrong length was passed to the objective.
    #[error("AoI series has {actual} frames, expected horizon {expected}")]
    SeriesLength { expected: usize, actual: usize },

    /// The closed-form index is undefined for a zero channel probability.
    #[error("channel reliability must be positive")]
    ZeroChannelProbability,

    /// The finite-population Greedy upper bound requires (1/T)·Σ 1/p_i > 1.
    #[error("finite-form Greedy bound undefined: (1/T)*sum(1/p_i) = {load} <= 1")]
    GreedyBoundInfeasible { load: f64 },

    /// The exact DP would visit more state-slots than the configured budget.
    #[error("DP state space too large: {state_slots:.3e} state-slots exceeds budget {budget:.3e}")]
    DpBudgetExceeded { state_slots: f64, budget: f64 },

    /// A decision was requested from a DP solution without a retained table.
    #[error("DP solution was computed without a decision table")]
    DpPolicyNotRetained,

    /// A DP decision lookup used a state outside the solved ranges.
    #[error("DP state out of range: {detail}")]
    DpStateOutOfRange { detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
