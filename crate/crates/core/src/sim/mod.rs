//! Synchronous round driver over all peers and transactions.

mod config;
mod harness;
mod outcome;

pub use config::{assign_roles, evenly_spaced_transactions, generate_transactions, SimConfig};
pub use harness::{
    check_convergence, honest_spread, run_consensus, run_consensus_with, run_round,
    run_round_with, run_transaction, Emission, Instance, KeyedPlanner, RoundPlanner, RoundTrace,
    RunResult,
};
pub use outcome::{capacity, ConsensusOutcome, TxOutcome};
