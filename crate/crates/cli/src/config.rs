//! Layered configuration: preset (or defaults), then a key-value file,
//! then command-line flags.
//!
//! The file format is one `key = value` per line, keys spelled like the
//! flags without the leading dashes. `#` starts a comment.
//!
//! ```text
//! peers = 20000
//! sample-ratio = 0.01
//! byzantine = 0.01
//! no-history = true
//! ```

use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser};
use eda_core::sim::generate_transactions;
use eda_core::{EdaError, InitMode, SimConfig};
use thiserror::Error;

use crate::presets;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },

    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },

    #[error("invalid value `{value}` for `{field}`: {reason}")]
    BadValue {
        field: String,
        value: String,
        reason: String,
    },

    #[error("`{field}` is out of range: {reason}")]
    OutOfRange { field: String, reason: String },

    #[error("unknown preset `{0}` (try --list-presets)")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Other(#[from] EdaError),
}

#[derive(Parser, Debug, Clone)]
#[command(name = "eda", version, about = "Run median-gossip ordering experiments")]
pub struct Args {
    /// Number of peers
    #[arg(long, default_value_t = SimConfig::default().n_peers)]
    pub peers: usize,

    /// Fraction of the other peers each peer sends to per round, in (0, 1]
    #[arg(long, default_value_t = SimConfig::default().sample_ratio)]
    pub sample_ratio: f64,

    /// Agreement tolerance, in (0, 1)
    #[arg(long, default_value_t = SimConfig::default().epsilon)]
    pub epsilon: f64,

    /// Fraction of faulty peers, in [0, 1)
    #[arg(long, default_value_t = SimConfig::default().byzantine_fraction)]
    pub byzantine: f64,

    /// Random seed
    #[arg(long, default_value_t = SimConfig::default().seed)]
    pub seed: u64,

    /// Initial spread of estimates
    #[arg(long, default_value_t = SimConfig::default().init_mode.to_string(),
          value_parser = ["uniform-grid", "random"])]
    pub init: String,

    /// Half-width of the initial spread around each transaction's anchor
    #[arg(long, default_value_t = SimConfig::default().jitter)]
    pub jitter: f64,

    /// Number of transactions ordered in parallel
    #[arg(long, default_value_t = SimConfig::default().transactions.len())]
    pub transactions: usize,

    /// Round cap per transaction
    #[arg(long, default_value_t = SimConfig::default().max_rounds)]
    pub max_rounds: u32,

    /// Histogram bins over [0, 1]
    #[arg(long, default_value_t = SimConfig::default().histogram_bins)]
    pub histogram_bins: usize,

    /// Skip per-round statistics; only the outcome is written [default: off]
    #[arg(long)]
    pub no_history: bool,

    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    /// Named experiment to start from [default: none]
    #[arg(long)]
    pub preset: Option<String>,

    /// Key-value config file applied before flags [default: none]
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Print the available presets and exit
    #[arg(long)]
    pub list_presets: bool,
}

/// Field values given explicitly, by a file or by flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub peers: Option<usize>,
    pub sample_ratio: Option<f64>,
    pub epsilon: Option<f64>,
    pub byzantine: Option<f64>,
    pub seed: Option<u64>,
    pub init: Option<InitMode>,
    pub jitter: Option<f64>,
    pub transactions: Option<usize>,
    pub max_rounds: Option<u32>,
    pub histogram_bins: Option<usize>,
    pub no_history: Option<bool>,
}

impl Overrides {
    /// Later values win.
    pub fn merge(self, later: Overrides) -> Overrides {
        Overrides {
            peers: later.peers.or(self.peers),
            sample_ratio: later.sample_ratio.or(self.sample_ratio),
            epsilon: later.epsilon.or(self.epsilon),
            byzantine: later.byzantine.or(self.byzantine),
            seed: later.seed.or(self.seed),
            init: later.init.or(self.init),
            jitter: later.jitter.or(self.jitter),
            transactions: later.transactions.or(self.transactions),
            max_rounds: later.max_rounds.or(self.max_rounds),
            histogram_bins: later.histogram_bins.or(self.histogram_bins),
            no_history: later.no_history.or(self.no_history),
        }
    }

    pub fn apply(&self, mut config: SimConfig) -> Result<SimConfig, ConfigError> {
        if let Some(v) = self.peers {
            config.n_peers = v;
        }
        if let Some(v) = self.sample_ratio {
            config.sample_ratio = v;
        }
        if let Some(v) = self.epsilon {
            config.epsilon = v;
        }
        if let Some(v) = self.byzantine {
            config.byzantine_fraction = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.init {
            config.init_mode = v;
        }
        if let Some(v) = self.jitter {
            config.jitter = v;
        }
        if let Some(v) = self.max_rounds {
            config.max_rounds = v;
        }
        if let Some(v) = self.histogram_bins {
            config.histogram_bins = v;
        }
        if let Some(v) = self.no_history {
            config.record_history = !v;
        }
        if let Some(count) = self.transactions {
            if count == 0 {
                return Err(ConfigError::OutOfRange {
                    field: "transactions".into(),
                    reason: "at least one is required".into(),
                });
            }
            config.transactions = generate_transactions(count, config.epsilon);
        }
        config.validate().map_err(flag_error)?;
        Ok(config)
    }
}

/// Renames library field names to the flag spelling.
fn flag_error(err: EdaError) -> ConfigError {
    match err {
        EdaError::InvalidConfig { field, reason } => {
            let flag = match field {
                "n_peers" => "peers",
                "sample_ratio" => "sample-ratio",
                "byzantine_fraction" => "byzantine",
                "max_rounds" => "max-rounds",
                "histogram_bins" => "histogram-bins",
                "init_mode" => "init",
                other => other,
            };
            ConfigError::OutOfRange {
                field: flag.to_string(),
                reason,
            }
        }
        other => ConfigError::Other(other),
    }
}

fn parse_value<T: std::str::FromStr>(field: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        field: field.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

pub fn parse_config_text(text: &str) -> Result<Overrides, ConfigError> {
    let mut o = Overrides::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or(ConfigError::Malformed { line: line_no })?;
        match key {
            "peers" => o.peers = Some(parse_value(key, value)?),
            "sample-ratio" => o.sample_ratio = Some(parse_value(key, value)?),
            "epsilon" => o.epsilon = Some(parse_value(key, value)?),
            "byzantine" => o.byzantine = Some(parse_value(key, value)?),
            "seed" => o.seed = Some(parse_value(key, value)?),
            "init" => o.init = Some(parse_value(key, value)?),
            "jitter" => o.jitter = Some(parse_value(key, value)?),
            "transactions" => o.transactions = Some(parse_value(key, value)?),
            "max-rounds" => o.max_rounds = Some(parse_value(key, value)?),
            "histogram-bins" => o.histogram_bins = Some(parse_value(key, value)?),
            "no-history" => o.no_history = Some(parse_value(key, value)?),
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                    line: line_no,
                })
            }
        }
    }
    Ok(o)
}

pub fn read_config_file(path: &Path) -> Result<Overrides, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_text(&text)
}

fn from_command_line(m: &ArgMatches, id: &str) -> bool {
    m.value_source(id) == Some(ValueSource::CommandLine)
}

/// Only the flags actually typed count as overrides.
pub fn flag_overrides(args: &Args, m: &ArgMatches) -> Result<Overrides, ConfigError> {
    let given = |id| from_command_line(m, id);
    Ok(Overrides {
        peers: given("peers").then_some(args.peers),
        sample_ratio: given("sample_ratio").then_some(args.sample_ratio),
        epsilon: given("epsilon").then_some(args.epsilon),
        byzantine: given("byzantine").then_some(args.byzantine),
        seed: given("seed").then_some(args.seed),
        init: if given("init") {
            Some(parse_value("init", &args.init)?)
        } else {
            None
        },
        jitter: given("jitter").then_some(args.jitter),
        transactions: given("transactions").then_some(args.transactions),
        max_rounds: given("max_rounds").then_some(args.max_rounds),
        histogram_bins: given("histogram_bins").then_some(args.histogram_bins),
        no_history: given("no_history").then_some(args.no_history),
    })
}

/// A fully resolved invocation.
#[derive(Debug, Clone)]
pub struct Invocation {
    /// Artifact stem: the preset name, or `eda`.
    pub name: String,
    pub config: SimConfig,
    pub out: PathBuf,
}

/// Parses argv (including the program name) into clap's view.
pub fn parse_args<I, T>(argv: I) -> Result<(Args, ArgMatches), clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = Args::command().try_get_matches_from(argv)?;
    let args = Args::from_arg_matches(&matches)?;
    Ok((args, matches))
}

/// Resolves preset, file and flags into one validated config.
pub fn resolve(args: &Args, matches: &ArgMatches) -> Result<Invocation, ConfigError> {
    let (name, base) = match &args.preset {
        Some(p) => {
            let preset = presets::find(p).ok_or_else(|| ConfigError::UnknownPreset(p.clone()))?;
            (preset.name.to_string(), preset.config)
        }
        None => ("eda".to_string(), SimConfig::default()),
    };
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => Overrides::default(),
    };
    let layered = file.merge(flag_overrides(args, matches)?);
    let config = layered.apply(base)?;
    Ok(Invocation {
        name,
        config,
        out: args.out.clone(),
    })
}
