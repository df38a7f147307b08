//! The per-peer state machine: sampling, median aggregation, activation,
//! initialization and Byzantine emission.

use std::fmt;

use rand::seq::index;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{EdaError, Result};
use crate::types::{OrderEstimate, PeerId, Role, TransactionId};

/// Median of a non-empty list; even lengths average the two middle values.
pub fn median(values: &[OrderEstimate]) -> Result<OrderEstimate> {
    let mut buf = values.to_vec();
    median_in_place(&mut buf).ok_or(EdaError::EmptyInput)
}

/// Like [`median`] but reorders `values` instead of copying.
pub fn median_in_place(values: &mut [OrderEstimate]) -> Option<OrderEstimate> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let cmp = |a: &OrderEstimate, b: &OrderEstimate| a.value().total_cmp(&b.value());
    let mid = n / 2;
    let (below, upper, _) = values.select_nth_unstable_by(mid, cmp);
    let upper = upper.value();
    if n % 2 == 1 {
        return Some(OrderEstimate::clamped(upper));
    }
    let lower = below
        .iter()
        .map(|e| e.value())
        .max_by(f64::total_cmp)
        .expect("even length leaves a lower half");
    // Mean of two points of [0, 1] stays inside their hull.
    Some(OrderEstimate::clamped(lower + (upper - lower) / 2.0))
}

/// Activation applied to the aggregate. The identity.
pub fn activate(aggregated: OrderEstimate) -> OrderEstimate {
    aggregated
}

/// Recipients of one peer's estimate in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePlan {
    pub sender: PeerId,
    pub recipients: Vec<PeerId>,
}

/// `max(1, round(sample_ratio · (n_peers − 1)))`.
pub fn sample_size(n_peers: usize, sample_ratio: f64) -> usize {
    let k = (sample_ratio * (n_peers.saturating_sub(1)) as f64).round() as usize;
    k.clamp(1, n_peers.saturating_sub(1).max(1))
}

/// Uniform random subset of the other `n_peers − 1` peers.
pub fn draw_sample<R: RngCore + ?Sized>(
    sender: PeerId,
    n_peers: usize,
    sample_ratio: f64,
    rng: &mut R,
) -> Result<SamplePlan> {
    if n_peers < 2 {
        return Err(EdaError::TooFewPeers(n_peers));
    }
    if !(sample_ratio > 0.0 && sample_ratio <= 1.0) {
        return Err(EdaError::config(
            "sample_ratio",
            format!("{sample_ratio} is outside (0, 1]"),
        ));
    }
    let k = sample_size(n_peers, sample_ratio);
    let me = sender.index();
    let recipients = index::sample(rng, n_peers - 1, k)
        .into_iter()
        .map(|j| PeerId::from(if j >= me { j + 1 } else { j }))
        .collect();
    Ok(SamplePlan { sender, recipients })
}

/// One peer's view of one transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerState {
    pub id: PeerId,
    pub role: Role,
    /// Current `s_i^t`.
    pub estimate: OrderEstimate,
    /// Values received this round; its length is `M_i`.
    pub inbox: Vec<OrderEstimate>,
}

impl PeerState {
    pub fn new(id: PeerId, role: Role, estimate: OrderEstimate) -> Self {
        PeerState {
            id,
            role,
            estimate,
            inbox: Vec::new(),
        }
    }

    pub fn is_honest(&self) -> bool {
        self.role == Role::Honest
    }

    /// Applies [`honest_update`] and clears the inbox.
    pub(crate) fn settle(&mut self) {
        if self.is_honest() {
            if let Some(m) = median_in_place(&mut self.inbox) {
                self.estimate = activate(m);
            }
        }
        self.inbox.clear();
    }
}

/// `a(median(inbox))`, or the previous estimate when nothing arrived.
pub fn honest_update(state: &PeerState) -> OrderEstimate {
    match median(&state.inbox) {
        Ok(m) => activate(m),
        Err(_) => state.estimate,
    }
}

/// What a faulty peer sends. Values outside `[0, 1]` are clamped by the
/// receiver.
pub trait ByzantineStrategy: Send + Sync + fmt::Debug {
    fn emit(&self, tx: &TransactionId, round: u32, rng: &mut dyn RngCore) -> f64;
}

/// Fresh uniform value on `[0, 1)` per round and transaction.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformSpammer;

impl ByzantineStrategy for UniformSpammer {
    fn emit(&self, _tx: &TransactionId, _round: u32, rng: &mut dyn RngCore) -> f64 {
        rng.random::<f64>()
    }
}

/// Always sends the same value. Useful for pushing against the clamp.
#[derive(Debug, Clone, Copy)]
pub struct FixedValue(pub f64);

impl ByzantineStrategy for FixedValue {
    fn emit(&self, _tx: &TransactionId, _round: u32, _rng: &mut dyn RngCore) -> f64 {
        self.0
    }
}

/// The default adversary's emission.
pub fn byzantine_emit<R: RngCore>(tx: &TransactionId, rng: &mut R) -> OrderEstimate {
    OrderEstimate::clamped(UniformSpammer.emit(tx, 0, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Peers spread evenly by index.
    UniformGrid,
    /// Independent uniform jitter per peer.
    Random,
}

impl InitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InitMode::UniformGrid => "uniform-grid",
            InitMode::Random => "random",
        }
    }
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InitMode {
    type Err = EdaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-grid" => Ok(InitMode::UniformGrid),
            "random" => Ok(InitMode::Random),
            other => Err(EdaError::config(
                "init",
                format!("`{other}` is not one of uniform-grid, random"),
            )),
        }
    }
}

/// Round-0 estimate of `peer` around `anchor`.
///
/// Grid mode maps index `0..n` linearly onto `anchor ± jitter`; random mode
/// draws `anchor + U(−jitter, jitter)`. Both clamp to `[0, 1]`.
pub fn initialize_estimate<R: RngCore + ?Sized>(
    peer: PeerId,
    n_peers: usize,
    mode: InitMode,
    anchor: f64,
    jitter: f64,
    rng: &mut R,
) -> OrderEstimate {
    let offset = match mode {
        InitMode::UniformGrid => {
            let frac = if n_peers < 2 {
                0.5
            } else {
                peer.index() as f64 / (n_peers - 1) as f64
            };
            (frac - 0.5) * 2.0 * jitter
        }
        InitMode::Random => jitter * (2.0 * rng.random::<f64>() - 1.0),
    };
    OrderEstimate::clamped(anchor + offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn est(v: &[f64]) -> Vec<OrderEstimate> {
        v.iter().map(|&x| OrderEstimate::new(x).unwrap()).collect()
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&est(&[0.7])).unwrap().value(), 0.7);
        assert_eq!(median(&est(&[0.1, 0.5, 0.9])).unwrap().value(), 0.5);
        assert!((median(&est(&[0.2, 0.4])).unwrap().value() - 0.3).abs() < 1e-15);
        assert!((median(&est(&[0.9, 0.1, 0.4, 0.2])).unwrap().value() - 0.3).abs() < 1e-15);
        assert!(matches!(median(&[]), Err(EdaError::EmptyInput)));
    }

    #[test]
    fn activation_is_identity() {
        for v in [0.5, 0.0, 1.0] {
            let e = OrderEstimate::new(v).unwrap();
            assert_eq!(activate(e), e);
        }
    }

    #[test]
    fn sample_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plan = draw_sample(PeerId(17), 20_000, 0.01, &mut rng).unwrap();
        assert_eq!(plan.recipients.len(), 200);
        let plan = draw_sample(PeerId(0), 2, 0.01, &mut rng).unwrap();
        assert_eq!(plan.recipients, vec![PeerId(1)]);
        let plan = draw_sample(PeerId(1), 2, 0.01, &mut rng).unwrap();
        assert_eq!(plan.recipients, vec![PeerId(0)]);
        let plan = draw_sample(PeerId(2), 5, 1.0, &mut rng).unwrap();
        let got: BTreeSet<_> = plan.recipients.into_iter().collect();
        assert_eq!(got, [0, 1, 3, 4].map(PeerId).into_iter().collect());
    }

    #[test]
    fn draw_sample_rejects_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            draw_sample(PeerId(0), 1, 0.5, &mut rng),
            Err(EdaError::TooFewPeers(1))
        ));
        assert!(draw_sample(PeerId(0), 10, 0.0, &mut rng).is_err());
        assert!(draw_sample(PeerId(0), 10, 1.5, &mut rng).is_err());
    }

    #[test]
    fn draw_sample_is_deterministic() {
        let a = draw_sample(PeerId(3), 1000, 0.05, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = draw_sample(PeerId(3), 1000, 0.05, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn draw_sample_covers_peers_uniformly() {
        // Every other peer is picked with probability k / (n - 1).
        let n = 11;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut hits = vec![0u32; n];
        let trials = 20_000;
        for _ in 0..trials {
            for r in draw_sample(PeerId(4), n, 0.3, &mut rng).unwrap().recipients {
                hits[r.index()] += 1;
            }
        }
        assert_eq!(hits[4], 0);
        let expected = trials as f64 * 3.0 / 10.0;
        for (i, &h) in hits.iter().enumerate().filter(|(i, _)| *i != 4) {
            assert!((h as f64 - expected).abs() < 0.05 * expected, "peer {i}: {h}");
        }
    }

    #[test]
    fn honest_update_examples() {
        let mut s = PeerState::new(PeerId(0), Role::Honest, OrderEstimate::new(0.9).unwrap());
        s.inbox = est(&[0.2, 0.6, 0.7]);
        assert_eq!(honest_update(&s).value(), 0.6);
        s.inbox.clear();
        assert_eq!(honest_update(&s).value(), 0.9);
        s.inbox = est(&[0.33; 8]);
        assert_eq!(honest_update(&s).value(), 0.33);
    }

    #[test]
    fn settle_clears_inbox_and_skips_byzantine() {
        let mut s = PeerState::new(PeerId(0), Role::Honest, OrderEstimate::new(0.9).unwrap());
        s.inbox = est(&[0.1, 0.2, 0.3]);
        s.settle();
        assert_eq!(s.estimate.value(), 0.2);
        assert!(s.inbox.is_empty());

        let mut b = PeerState::new(PeerId(1), Role::Byzantine, OrderEstimate::new(0.9).unwrap());
        b.inbox = est(&[0.1]);
        b.settle();
        assert_eq!(b.estimate.value(), 0.9);
        assert!(b.inbox.is_empty());
    }

    #[test]
    fn byzantine_emit_range_and_replay() {
        let tx = TransactionId::with_anchor(0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let v = byzantine_emit(&tx, &mut rng).value();
            assert!((0.0..=1.0).contains(&v));
        }
        let a = byzantine_emit(&tx, &mut ChaCha8Rng::seed_from_u64(11));
        let b = byzantine_emit(&tx, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn byzantine_emit_passes_chi_square() {
        // 100 equiprobable bins over 1e5 draws; 99 degrees of freedom.
        // Upper 0.001 critical value of chi^2(99) is 148.23.
        let tx = TransactionId::with_anchor(0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 100_000;
        let mut bins = [0u32; 100];
        for _ in 0..draws {
            let v = byzantine_emit(&tx, &mut rng).value();
            bins[((v * 100.0) as usize).min(99)] += 1;
        }
        let e = draws as f64 / 100.0;
        let chi2: f64 = bins.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 148.23, "chi2 = {chi2}");
    }

    #[test]
    fn initialization_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let grid = initialize_estimate(PeerId(1), 3, InitMode::UniformGrid, 0.5, 0.5, &mut rng);
        assert_eq!(grid.value(), 0.5);
        let lo = initialize_estimate(PeerId(0), 3, InitMode::UniformGrid, 0.5, 0.5, &mut rng);
        let hi = initialize_estimate(PeerId(2), 3, InitMode::UniformGrid, 0.5, 0.5, &mut rng);
        assert_eq!((lo.value(), hi.value()), (0.0, 1.0));
        for mode in [InitMode::UniformGrid, InitMode::Random] {
            for i in 0..50 {
                let e = initialize_estimate(PeerId(i), 50, mode, 0.37, 0.0, &mut rng);
                assert_eq!(e.value(), 0.37);
            }
        }
    }

    #[test]
    fn random_init_around_half_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 50_000;
        let vals: Vec<f64> = (0..n)
            .map(|i| initialize_estimate(PeerId(i), n as usize, InitMode::Random, 0.5, 0.5, &mut rng).value())
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01);
        assert!((var.sqrt() - 1.0 / 12f64.sqrt()).abs() < 0.005);
    }

    #[test]
    fn init_mode_parses() {
        assert_eq!("random".parse::<InitMode>().unwrap(), InitMode::Random);
        assert_eq!("uniform-grid".parse::<InitMode>().unwrap(), InitMode::UniformGrid);
        assert!("grid".parse::<InitMode>().is_err());
    }

    proptest! {
        #[test]
        fn median_stays_in_hull(v in proptest::collection::vec(0.0f64..=1.0, 1..64)) {
            let m = median(&est(&v)).unwrap().value();
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= m && m <= hi);
        }

        #[test]
        fn median_matches_sort(v in proptest::collection::vec(0.0f64..=1.0, 1..64)) {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            let n = s.len();
            let expect = if n % 2 == 1 { s[n / 2] } else { s[n / 2 - 1] + (s[n / 2] - s[n / 2 - 1]) / 2.0 };
            prop_assert_eq!(median(&est(&v)).unwrap().value(), expect);
        }

        #[test]
        fn honest_update_bounded(prev in 0.0f64..=1.0, inbox in proptest::collection::vec(0.0f64..=1.0, 0..32)) {
            let mut s = PeerState::new(PeerId(0), Role::Honest, OrderEstimate::new(prev).unwrap());
            s.inbox = est(&inbox);
            let out = honest_update(&s).value();
            let pool: Vec<f64> = if inbox.is_empty() { vec![prev] } else { inbox };
            let lo = pool.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = pool.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= out && out <= hi);
        }

        #[test]
        fn sample_plan_invariants(n in 2usize..400, ratio in 0.001f64..=1.0, sender_frac in 0.0f64..1.0, seed: u64) {
            let sender = PeerId::from(((sender_frac * n as f64) as usize).min(n - 1));
            let plan = draw_sample(sender, n, ratio, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let set: BTreeSet<_> = plan.recipients.iter().copied().collect();
            prop_assert_eq!(set.len(), plan.recipients.len());
            prop_assert!(!set.contains(&sender));
            prop_assert!(set.iter().all(|p| p.index() < n));
            let expect = ((ratio * (n - 1) as f64).round() as usize).max(1);
            prop_assert_eq!(plan.recipients.len(), expect);
        }
    }
}
