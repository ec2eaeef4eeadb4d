//! Spectrum handoff performance analysis for cognitive radio ad hoc networks.
//!
//! Two independent engines compute the same metrics for `N` SU pairs sharing
//! `M` licensed channels with ON/OFF primary users:
//!
//! * the analytic engine ([`pu`], [`contention`], [`handoff`]) solves the PU
//!   occupancy chain for channel availability `u`, the saturated system chain
//!   for the SU–SU collision probability `q`, and the per-SU handoff chain for
//!   throughput, SU–PU collision probability and backlog dwell;
//! * the simulator ([`sim`]) plays the slotted coordination and handoff
//!   protocol directly.
//!
//! [`cli`] wraps both for sweeps and cross-validation.

pub mod chain;
pub mod cli;
pub mod contention;
pub mod error;
pub mod handoff;
pub mod pu;
pub mod sim;

pub use chain::{stationary_distribution, StationaryDistribution, TransitionMatrix};
pub use contention::{ContentionParams, ContentionResult, Scheme};
pub use error::{Error, Result};
pub use handoff::{analyze, Analysis, DerivedMetrics, HandoffState, ModelParams, StateClass};
pub use pu::{Availability, PuParams};
pub use sim::{SimConfig, SimResult};
