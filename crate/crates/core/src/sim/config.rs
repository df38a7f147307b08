use rand::seq::SliceRandom;

use crate::error::{EdaError, Result};
use crate::protocol::InitMode;
use crate::rng::{Purpose, StreamSeed};
use crate::types::{Role, TransactionId};

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_peers: usize,
    /// Fraction of the other peers each peer sends to per round.
    pub sample_ratio: f64,
    pub epsilon: f64,
    pub byzantine_fraction: f64,
    pub seed: u64,
    pub init_mode: InitMode,
    pub jitter: f64,
    pub transactions: Vec<TransactionId>,
    pub max_rounds: u32,
    pub record_history: bool,
    pub histogram_bins: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_peers: 1000,
            sample_ratio: 0.02,
            epsilon: 0.01,
            byzantine_fraction: 0.0,
            seed: 0,
            init_mode: InitMode::Random,
            jitter: 0.5,
            transactions: vec![TransactionId::with_anchor(0, 0.5)],
            max_rounds: 100,
            record_history: true,
            histogram_bins: 100,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_peers < 2 {
            return Err(EdaError::config("n_peers", format!("{} is below 2", self.n_peers)));
        }
        if u32::try_from(self.n_peers).is_err() {
            return Err(EdaError::config("n_peers", "does not fit in 32 bits"));
        }
        if !(self.sample_ratio > 0.0 && self.sample_ratio <= 1.0) {
            return Err(EdaError::config(
                "sample_ratio",
                format!("{} is outside (0, 1]", self.sample_ratio),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(EdaError::config(
                "epsilon",
                format!("{} is outside (0, 1)", self.epsilon),
            ));
        }
        if !(self.byzantine_fraction >= 0.0 && self.byzantine_fraction < 1.0) {
            return Err(EdaError::config(
                "byzantine_fraction",
                format!("{} is outside [0, 1)", self.byzantine_fraction),
            ));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(EdaError::config("jitter", format!("{} is negative", self.jitter)));
        }
        if self.max_rounds < 1 {
            return Err(EdaError::config("max_rounds", "must be at least 1"));
        }
        if self.histogram_bins < 1 {
            return Err(EdaError::config("histogram_bins", "must be at least 1"));
        }
        if self.transactions.is_empty() {
            return Err(EdaError::config("transactions", "at least one is required"));
        }
        let mut seen = std::collections::HashSet::new();
        for tx in &self.transactions {
            if !seen.insert(tx.index) {
                return Err(EdaError::DuplicateTransaction(tx.index));
            }
        }
        Ok(())
    }

    /// `⌊byzantine_fraction · n_peers⌋`, tolerant of the representation
    /// error in products like `0.29 · 100`.
    pub fn byzantine_count(&self) -> usize {
        let c = (self.byzantine_fraction * self.n_peers as f64 + 1e-9).floor() as usize;
        c.min(self.n_peers - 1)
    }
}

/// Roles for every peer: a seed-derived permutation, the first
/// [`SimConfig::byzantine_count`] positions of which are Byzantine.
pub fn assign_roles(config: &SimConfig) -> Vec<Role> {
    let mut roles = vec![Role::Honest; config.n_peers];
    let count = config.byzantine_count();
    if count == 0 {
        return roles;
    }
    let mut order: Vec<usize> = (0..config.n_peers).collect();
    order.shuffle(&mut StreamSeed(config.seed).global(Purpose::Roles));
    for &i in &order[..count] {
        roles[i] = Role::Byzantine;
    }
    roles
}

/// `count` transactions with content-hash digests.
///
/// A single transaction is anchored at 0.5. Otherwise candidate digests
/// are drawn in sequence and a candidate is skipped when its anchor lies
/// within `min(2ε, 1/(2·count))` of one already taken.
pub fn generate_transactions(count: usize, epsilon: f64) -> Vec<TransactionId> {
    if count == 1 {
        return vec![TransactionId::with_anchor(0, 0.5)];
    }
    let min_gap = (2.0 * epsilon).min(0.5 / count as f64);
    let mut out: Vec<TransactionId> = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let mut attempt = 0u32;
        loop {
            let tx = TransactionId::from_content(i, format!("eda/package/{i}/{attempt}").as_bytes());
            let a = tx.anchor();
            let clear = out.iter().all(|o| (o.anchor() - a).abs() >= min_gap);
            if clear || attempt >= 10_000 {
                out.push(tx);
                break;
            }
            attempt += 1;
        }
    }
    out
}

/// `count` transactions anchored at `i / (count − 1)`, the widest
/// possible spacing on `[0, 1]`.
pub fn evenly_spaced_transactions(count: usize) -> Vec<TransactionId> {
    if count == 1 {
        return vec![TransactionId::with_anchor(0, 0.5)];
    }
    (0..count)
        .map(|i| TransactionId::with_anchor(i as u64, i as f64 / (count - 1) as f64))
        .collect()
}
