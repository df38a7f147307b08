//! Named experiments: the two single-transaction convergence figures and
//! the parallel run with faulty peers, each at full and desk scale.

use eda_core::sim::generate_transactions;
use eda_core::{InitMode, SimConfig, TransactionId};

#[derive(Debug, Clone)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub config: SimConfig,
    pub description: &'static str,
    /// Full-scale runs take minutes and stay out of the default test pass.
    pub slow: bool,
}

fn single(n_peers: usize, sample_ratio: f64, init_mode: InitMode) -> SimConfig {
    SimConfig {
        n_peers,
        sample_ratio,
        epsilon: 0.01,
        byzantine_fraction: 0.0,
        init_mode,
        jitter: 0.5,
        transactions: vec![TransactionId::with_anchor(0, 0.5)],
        max_rounds: 100,
        ..SimConfig::default()
    }
}

fn parallel(n_peers: usize, sample_ratio: f64) -> SimConfig {
    SimConfig {
        n_peers,
        sample_ratio,
        epsilon: 0.01,
        byzantine_fraction: 0.01,
        init_mode: InitMode::Random,
        jitter: 0.05,
        transactions: generate_transactions(10, 0.01),
        max_rounds: 100,
        ..SimConfig::default()
    }
}

pub fn presets() -> Vec<ExperimentPreset> {
    vec![
        ExperimentPreset {
            name: "fig1-uniform",
            config: single(20_000, 0.01, InitMode::UniformGrid),
            description: "20k peers, 1% sample, evenly spread start, eps 0.01",
            slow: true,
        },
        ExperimentPreset {
            name: "fig2-random",
            config: single(20_000, 0.01, InitMode::Random),
            description: "20k peers, 1% sample, uniform random start, eps 0.01",
            slow: true,
        },
        ExperimentPreset {
            name: "fig4-parallel",
            config: parallel(20_000, 0.01),
            description: "20k peers, 1% faulty, 1% sample, 10 packages in parallel, eps 0.01",
            slow: true,
        },
        ExperimentPreset {
            name: "fig1-uniform-desk",
            config: single(1000, 0.02, InitMode::UniformGrid),
            description: "1k peers, 2% sample, evenly spread start, eps 0.01",
            slow: false,
        },
        ExperimentPreset {
            name: "fig2-random-desk",
            config: single(1000, 0.02, InitMode::Random),
            description: "1k peers, 2% sample, uniform random start, eps 0.01",
            slow: false,
        },
        ExperimentPreset {
            name: "fig4-parallel-desk",
            config: parallel(2000, 0.05),
            description: "2k peers, 1% faulty, 5% sample, 10 packages in parallel, eps 0.01",
            slow: false,
        },
    ]
}

pub fn find(name: &str) -> Option<ExperimentPreset> {
    presets().into_iter().find(|p| p.name == name)
}
