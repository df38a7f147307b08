//! Shared fixtures for the criterion benches.

use eda_core::sim::{assign_roles, Instance};
use eda_core::{SimConfig, TransactionId};

/// Config at `n_peers` with an expected inbox of about `inbox` values.
pub fn config(n_peers: usize, inbox: usize) -> SimConfig {
    SimConfig {
        n_peers,
        sample_ratio: inbox as f64 / (n_peers - 1) as f64,
        record_history: false,
        ..SimConfig::default()
    }
}

/// Round-0 instance for the default single transaction.
pub fn fresh_instance(config: &SimConfig) -> Instance {
    let roles = assign_roles(config);
    Instance::initialize(config, &TransactionId::with_anchor(0, 0.5), &roles)
}
