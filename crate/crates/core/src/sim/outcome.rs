use crate::types::TransactionId;

#[derive(Debug, Clone, PartialEq)]
pub struct TxOutcome {
    pub tx: TransactionId,
    pub converged: bool,
    /// Rounds executed; the round of first convergence when `converged`.
    pub rounds_used: u32,
    /// Median of the honest peers' final estimates.
    pub final_value: f64,
    /// Honest `max − min` at the end.
    pub final_spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusOutcome {
    /// One entry per transaction, sorted by transaction id.
    pub per_tx: Vec<TxOutcome>,
    /// Transactions by ascending final value (ties by id).
    pub package_order: Vec<TransactionId>,
    /// Pairs whose final values lie within ε, listed in package order.
    pub collisions: Vec<(TransactionId, TransactionId)>,
}

impl ConsensusOutcome {
    pub fn assemble(mut per_tx: Vec<TxOutcome>, epsilon: f64) -> Self {
        per_tx.sort_by(|a, b| a.tx.cmp(&b.tx));
        let mut ranked: Vec<&TxOutcome> = per_tx.iter().collect();
        ranked.sort_by(|a, b| a.final_value.total_cmp(&b.final_value).then_with(|| a.tx.cmp(&b.tx)));

        let mut collisions = Vec::new();
        for (i, a) in ranked.iter().enumerate() {
            for b in &ranked[i + 1..] {
                if b.final_value - a.final_value > epsilon {
                    break;
                }
                collisions.push((a.tx.clone(), b.tx.clone()));
            }
        }
        let package_order = ranked.iter().map(|o| o.tx.clone()).collect();
        ConsensusOutcome {
            per_tx,
            package_order,
            collisions,
        }
    }

    pub fn get(&self, tx: &TransactionId) -> Option<&TxOutcome> {
        self.per_tx
            .binary_search_by(|o| o.tx.cmp(tx))
            .ok()
            .map(|i| &self.per_tx[i])
    }

    pub fn all_converged(&self) -> bool {
        self.per_tx.iter().all(|o| o.converged)
    }
}

/// Number of ε-separated package slots on `[0, 1]`: `⌊1/ε⌋`.
pub fn capacity(epsilon: f64) -> u64 {
    (1.0 / epsilon).floor() as u64
}
