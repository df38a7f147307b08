//! Running an experiment and writing its files.
//!
//! For a run named `<name>` the output directory receives `<name>.csv`,
//! `<name>.hist.csv`, `<name>.byz.csv` (when faulty peers are configured
//! and history is on) and `<name>.outcome.json`.

use std::fs;
use std::path::{Path, PathBuf};

use eda_core::reporting::{artifact_paths, emit_csv};
use eda_core::{run_consensus, ConsensusOutcome, EdaError, SimConfig};
use serde::Serialize;

/// Stable JSON view of a run.
#[derive(Debug, Serialize)]
pub struct OutcomeDocument {
    pub name: String,
    pub config: ConfigSummary,
    pub all_converged: bool,
    pub transactions: Vec<TxRecord>,
    /// Transaction indices, lowest final value first.
    pub package_order: Vec<u64>,
    /// Index pairs whose final values lie within epsilon.
    pub collisions: Vec<[u64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct ConfigSummary {
    pub n_peers: usize,
    pub sample_ratio: f64,
    pub epsilon: f64,
    pub byzantine_fraction: f64,
    pub byzantine_count: usize,
    pub seed: u64,
    pub init_mode: String,
    pub jitter: f64,
    pub max_rounds: u32,
    pub histogram_bins: usize,
    pub record_history: bool,
}

#[derive(Debug, Serialize)]
pub struct TxRecord {
    pub index: u64,
    pub digest: String,
    pub anchor: f64,
    pub converged: bool,
    pub rounds_used: u32,
    pub final_value: f64,
    pub final_spread: f64,
}

impl OutcomeDocument {
    pub fn new(name: &str, config: &SimConfig, outcome: &ConsensusOutcome) -> Self {
        OutcomeDocument {
            name: name.to_string(),
            config: ConfigSummary {
                n_peers: config.n_peers,
                sample_ratio: config.sample_ratio,
                epsilon: config.epsilon,
                byzantine_fraction: config.byzantine_fraction,
                byzantine_count: config.byzantine_count(),
                seed: config.seed,
                init_mode: config.init_mode.to_string(),
                jitter: config.jitter,
                max_rounds: config.max_rounds,
                histogram_bins: config.histogram_bins,
                record_history: config.record_history,
            },
            all_converged: outcome.all_converged(),
            transactions: outcome
                .per_tx
                .iter()
                .map(|o| TxRecord {
                    index: o.tx.index,
                    digest: o.tx.digest_hex(),
                    anchor: o.tx.anchor(),
                    converged: o.converged,
                    rounds_used: o.rounds_used,
                    final_value: o.final_value,
                    final_spread: o.final_spread,
                })
                .collect(),
            package_order: outcome.package_order.iter().map(|t| t.index).collect(),
            collisions: outcome
                .collisions
                .iter()
                .map(|(a, b)| [a.index, b.index])
                .collect(),
        }
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub outcome: ConsensusOutcome,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn all_converged(&self) -> bool {
        self.outcome.all_converged()
    }
}

/// Runs `config` and writes every artifact under `out`.
pub fn run_experiment(name: &str, config: &SimConfig, out: &Path) -> Result<RunReport, EdaError> {
    let run = run_consensus(config)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;

    let mut files = Vec::new();
    if !run.history.is_empty() {
        let dest = out.join(format!("{name}.csv"));
        emit_csv(&run.history, &dest)?;
        let (main, hist, byz) = artifact_paths(&dest);
        files.extend([main, hist]);
        if byz.exists() {
            files.push(byz);
        }
    }

    let json_path = out.join(format!("{name}.outcome.json"));
    let doc = OutcomeDocument::new(name, config, &run.outcome);
    let mut text = serde_json::to_string_pretty(&doc).expect("outcome serializes");
    text.push('\n');
    fs::write(&json_path, text).map_err(|e| io_err(&json_path, e))?;
    files.push(json_path);

    Ok(RunReport {
        outcome: run.outcome,
        files,
    })
}

fn io_err(path: &Path, source: std::io::Error) -> EdaError {
    EdaError::Io {
        path: path.to_path_buf(),
        source,
    }
}
