//! Age-of-Information scheduling for a single-hop broadcast network.
//!
//! A base station serves `M` clients over frames of `T` slots through
//! unreliable channels; each client's information age grows by one frame
//! until a fresh packet lands. This crate provides:
//!
//! - the slot/frame state machine and the exact trace-based objective
//!   identity ([`model`]),
//! - four low-complexity schedulers: greedy, stationary randomized,
//!   max-weight and the closed-form index rule ([`policy`]), plus the charged
//!   single-client threshold machinery behind the index ([`decoupled`]),
//! - the universal lower bound, per-policy upper bounds and guarantee ratios
//!   ([`bounds`]),
//! - an exact finite-horizon optimal baseline by backward induction ([`dp`]),
//! - a deterministic, parallel Monte Carlo harness ([`sim`]).

pub mod bounds;
pub mod config;
pub mod decoupled;
pub mod dp;
pub mod error;
pub mod model;
pub mod policy;
pub mod sim;

pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use model::{
    accumulate_objective, advance_frame, ewsaoi_from_objective, trace_objective, DeliveryTrace,
    EpisodeResult, FrameState, TraceObjective,
};
pub use policy::PolicyKind;
pub use sim::{monte_carlo, run_episode, sweep, ExperimentSpec, SummaryStats};
