//! Approximate agreement on transaction order by repeated median gossip.
//!
//! Each peer holds a scalar estimate in `[0, 1]` of where a transaction
//! belongs. Every round, each peer sends its estimate to a fresh random
//! sample of the others and replaces its own with the median of what it
//! received. Honest estimates contract until every pair is within `ε`.
//!
//! * [`order_stats`]: closed-form laws for the sample median.
//! * [`protocol`]: the peer state machine.
//! * [`sim`]: lockstep rounds, fault injection, convergence, outcomes.
//! * [`reporting`]: per-round statistics and CSV artifacts.

pub mod error;
pub mod order_stats;
pub mod protocol;
pub mod reporting;
pub mod rng;
pub mod sim;
pub mod types;

pub use error::{EdaError, Result};
pub use protocol::{ByzantineStrategy, InitMode, UniformSpammer};
pub use reporting::RoundStats;
pub use sim::{capacity, run_consensus, ConsensusOutcome, RunResult, SimConfig, TxOutcome};
pub use types::{OrderEstimate, PeerId, Role, TransactionId};
