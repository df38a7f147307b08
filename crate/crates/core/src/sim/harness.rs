use rayon::prelude::*;

use crate::error::Result;
use crate::protocol::{
    draw_sample, initialize_estimate, median, ByzantineStrategy, PeerState, UniformSpammer,
};
use crate::reporting::{collect, RoundStats};
use crate::rng::{Purpose, StreamSeed};
use crate::sim::config::{assign_roles, SimConfig};
use crate::sim::outcome::{ConsensusOutcome, TxOutcome};
use crate::types::{OrderEstimate, PeerId, Role, TransactionId};

/// All peers' state for one transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub tx: TransactionId,
    pub peers: Vec<PeerState>,
}

impl Instance {
    /// Round-0 state: every peer initialized around `c(tx)`.
    pub fn initialize(config: &SimConfig, tx: &TransactionId, roles: &[Role]) -> Self {
        let seed = StreamSeed(config.seed);
        let anchor = tx.anchor();
        let peers = roles
            .iter()
            .enumerate()
            .map(|(i, &role)| {
                let id = PeerId::from(i);
                let mut rng = seed.tx_stream(Purpose::Init, tx, 0, id);
                let e = initialize_estimate(
                    id,
                    config.n_peers,
                    config.init_mode,
                    anchor,
                    config.jitter,
                    &mut rng,
                );
                PeerState::new(id, role, e)
            })
            .collect();
        Instance {
            tx: tx.clone(),
            peers,
        }
    }

    pub fn from_estimates(tx: TransactionId, roles: &[Role], estimates: &[OrderEstimate]) -> Self {
        assert_eq!(roles.len(), estimates.len());
        let peers = roles
            .iter()
            .zip(estimates)
            .enumerate()
            .map(|(i, (&r, &e))| PeerState::new(PeerId::from(i), r, e))
            .collect();
        Instance { tx, peers }
    }

    pub fn n_peers(&self) -> usize {
        self.peers.len()
    }

    pub fn honest_values(&self) -> Vec<f64> {
        self.peers
            .iter()
            .filter(|p| p.is_honest())
            .map(|p| p.estimate.value())
            .collect()
    }

    pub fn estimates(&self) -> Vec<OrderEstimate> {
        self.peers.iter().map(|p| p.estimate).collect()
    }
}

/// One peer's outgoing traffic in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub recipients: Vec<PeerId>,
    /// Set for Byzantine senders; honest senders send their estimate.
    pub byzantine_value: Option<f64>,
}

/// Source of every random choice made during a round.
pub trait RoundPlanner: Sync {
    fn emission(&self, sender: PeerId, role: Role, round: u32) -> Emission;
}

/// The default planner: one keyed stream per `(transaction, round, sender)`
/// drives first the recipient sample and then any Byzantine value.
#[derive(Debug)]
pub struct KeyedPlanner<'a> {
    pub seed: StreamSeed,
    pub tx: &'a TransactionId,
    tx_key: u64,
    pub n_peers: usize,
    pub sample_ratio: f64,
    pub strategy: &'a dyn ByzantineStrategy,
}

impl<'a> KeyedPlanner<'a> {
    pub fn new(config: &SimConfig, tx: &'a TransactionId, strategy: &'a dyn ByzantineStrategy) -> Self {
        KeyedPlanner {
            seed: StreamSeed(config.seed),
            tx,
            tx_key: tx.stream_key(),
            n_peers: config.n_peers,
            sample_ratio: config.sample_ratio,
            strategy,
        }
    }
}

impl RoundPlanner for KeyedPlanner<'_> {
    fn emission(&self, sender: PeerId, role: Role, round: u32) -> Emission {
        let mut rng = self.seed.stream(Purpose::Gossip, self.tx_key, round, sender);
        let plan = draw_sample(sender, self.n_peers, self.sample_ratio, &mut rng)
            .expect("config validated before planning");
        let byzantine_value = match role {
            Role::Honest => None,
            Role::Byzantine => Some(self.strategy.emit(self.tx, round, &mut rng)),
        };
        Emission {
            recipients: plan.recipients,
            byzantine_value,
        }
    }
}

/// Values the Byzantine peers sent during one round, after clamping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundTrace {
    pub byzantine_values: Vec<f64>,
}

/// One synchronous round with the default planner and adversary.
pub fn run_round(instance: &mut Instance, round: u32, config: &SimConfig) -> RoundTrace {
    let tx = instance.tx.clone();
    let planner = KeyedPlanner::new(config, &tx, &UniformSpammer);
    run_round_with(instance, round, &planner)
}

/// Broadcast phase, then aggregation phase. Every sent value is read
/// before any estimate changes, so deliveries are simultaneous.
pub fn run_round_with<P: RoundPlanner + ?Sized>(
    instance: &mut Instance,
    round: u32,
    planner: &P,
) -> RoundTrace {
    let emissions: Vec<Emission> = instance
        .peers
        .par_iter()
        .map(|p| planner.emission(p.id, p.role, round))
        .collect();

    let mut trace = RoundTrace::default();
    for (sender, emission) in emissions.into_iter().enumerate() {
        let value = match emission.byzantine_value {
            Some(v) => {
                let v = OrderEstimate::clamped(v);
                trace.byzantine_values.push(v.value());
                v
            }
            None => instance.peers[sender].estimate,
        };
        for r in emission.recipients {
            let peer = &mut instance.peers[r.index()];
            // Byzantine peers never aggregate, so nothing is queued for them.
            if peer.is_honest() {
                peer.inbox.push(value);
            }
        }
    }

    instance.peers.par_iter_mut().for_each(PeerState::settle);
    trace
}

/// `max − min` over honest estimates.
pub fn honest_spread(instance: &Instance) -> f64 {
    let (lo, hi) = instance
        .peers
        .iter()
        .filter(|p| p.is_honest())
        .map(|p| p.estimate.value())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

/// Every pair of honest peers is within `epsilon` of each other.
pub fn check_convergence(instance: &Instance, epsilon: f64) -> bool {
    honest_spread(instance) <= epsilon
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: ConsensusOutcome,
    /// Per-round statistics in `(tx, round)` order; empty unless
    /// `record_history` is set.
    pub history: Vec<RoundStats>,
}

/// Runs one transaction from initialization to convergence or `max_rounds`.
pub fn run_transaction(
    config: &SimConfig,
    tx: &TransactionId,
    roles: &[Role],
    strategy: &dyn ByzantineStrategy,
) -> (TxOutcome, Vec<RoundStats>) {
    let planner = KeyedPlanner::new(config, tx, strategy);
    let show_faults = config.byzantine_count() > 0;
    let mut instance = Instance::initialize(config, tx, roles);
    let mut history = Vec::new();

    let mut converged = check_convergence(&instance, config.epsilon);
    if config.record_history {
        let mut stats = collect(&instance, 0, config);
        if show_faults {
            stats.byzantine_values = Some(Vec::new());
        }
        history.push(stats);
    }

    let mut rounds = 0;
    while !converged && rounds < config.max_rounds {
        rounds += 1;
        let trace = run_round_with(&mut instance, rounds, &planner);
        converged = check_convergence(&instance, config.epsilon);
        if config.record_history {
            let mut stats = collect(&instance, rounds, config);
            if show_faults {
                stats.byzantine_values = Some(trace.byzantine_values);
            }
            history.push(stats);
        }
    }

    let honest: Vec<OrderEstimate> = instance
        .peers
        .iter()
        .filter(|p| p.is_honest())
        .map(|p| p.estimate)
        .collect();
    let outcome = TxOutcome {
        tx: tx.clone(),
        converged,
        rounds_used: rounds,
        final_value: median(&honest).expect("at least one honest peer").value(),
        final_spread: honest_spread(&instance),
    };
    (outcome, history)
}

/// Runs every transaction of `config` against the uniform adversary.
pub fn run_consensus(config: &SimConfig) -> Result<RunResult> {
    run_consensus_with(config, &UniformSpammer)
}

/// Runs every transaction as an independent instance. Instances execute
/// concurrently; results do not depend on scheduling.
pub fn run_consensus_with(
    config: &SimConfig,
    strategy: &dyn ByzantineStrategy,
) -> Result<RunResult> {
    config.validate()?;
    let roles = assign_roles(config);
    let mut txs = config.transactions.clone();
    txs.sort();
    let results: Vec<(TxOutcome, Vec<RoundStats>)> = txs
        .par_iter()
        .map(|tx| run_transaction(config, tx, &roles, strategy))
        .collect();

    let mut per_tx = Vec::with_capacity(results.len());
    let mut history = Vec::new();
    for (o, h) in results {
        per_tx.push(o);
        history.extend(h);
    }
    Ok(RunResult {
        outcome: ConsensusOutcome::assemble(per_tx, config.epsilon),
        history,
    })
}
