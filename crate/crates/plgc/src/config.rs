//! Experiment configuration: defaults, flat key=value config files, CLI
//! overrides, and round-trippable emission.

use crate::data::RatingsFormat;
use crate::federation::Strategy;
use clap::Parser;
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value for {key}: {value:?}")]
    InvalidValue { key: String, value: String },
    #[error("{key} out of range: {msg}")]
    OutOfRange { key: String, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backbone {
    Mf,
    Ncf,
}

impl Backbone {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mf" => Some(Backbone::Mf),
            "ncf" => Some(Backbone::Ncf),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Backbone::Mf => "mf",
            Backbone::Ncf => "ncf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Beta,
    Gamma,
    Dim,
    Eta,
}

impl SweepParam {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "beta" => Some(SweepParam::Beta),
            "gamma" => Some(SweepParam::Gamma),
            "d" | "dim" => Some(SweepParam::Dim),
            "eta" => Some(SweepParam::Eta),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::Gamma => "gamma",
            SweepParam::Dim => "dim",
            SweepParam::Eta => "eta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// `NAME=v1,v2,...`
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let err = || ConfigError::InvalidValue {
            key: "sweep".into(),
            value: s.into(),
        };
        let (name, values) = s.split_once('=').ok_or_else(err)?;
        let param = SweepParam::parse(name).ok_or_else(err)?;
        let values: Vec<f64> = values
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err())?;
        if values.is_empty() {
            return Err(err());
        }
        Ok(SweepSpec { param, values })
    }

    pub fn emit(&self) -> String {
        let vals: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        format!("{}={}", self.param.as_str(), vals.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub format: RatingsFormat,
    pub strategy: Strategy,
    pub backbone: Backbone,
    pub dim: usize,
    pub rounds: usize,
    pub local_epochs: usize,
    pub batch: usize,
    /// clients sampled per round; None = all
    pub clients: Option<usize>,
    pub eta: f64,
    pub lr_decay: f64,
    pub beta: f64,
    pub gamma: f64,
    pub seed: u64,
    pub eval_every: usize,
    pub workers: usize,
    pub repeats: usize,
    pub min_interactions: usize,
    pub train_neg_ratio: usize,
    pub eval_negatives: usize,
    pub top_k: usize,
    pub trace_mixing: bool,
    pub no_diagnostics: bool,
    pub percent: bool,
    pub out: PathBuf,
    pub sweep: Option<SweepSpec>,
}

pub fn default_data_path() -> PathBuf {
    let root = std::env::var("FEDREC_DATA_DIR").unwrap_or_else(|_| "data".into());
    Path::new(&root).join("ml-100k").join("u.data")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: default_data_path(),
            format: RatingsFormat::Tab,
            strategy: Strategy::Plgc,
            backbone: Backbone::Mf,
            dim: 32,
            rounds: 100,
            local_epochs: 10,
            batch: 2048,
            clients: None,
            eta: 0.1,
            lr_decay: 0.98,
            beta: 0.5,
            gamma: 0.01,
            seed: 42,
            eval_every: 1,
            workers: 1,
            repeats: 1,
            min_interactions: 5,
            train_neg_ratio: 4,
            eval_negatives: 99,
            top_k: 10,
            trace_mixing: false,
            no_diagnostics: false,
            percent: false,
            out: PathBuf::from("runs"),
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = || ConfigError::InvalidValue {
            key: key.into(),
            value: value.into(),
        };
        macro_rules! num {
            () => {
                value.trim().parse().map_err(|_| invalid())?
            };
        }
        match key {
            "data" => self.data = PathBuf::from(value.trim()),
            "format" => self.format = RatingsFormat::parse(value.trim()).ok_or_else(invalid)?,
            "strategy" => self.strategy = Strategy::parse(value.trim()).ok_or_else(invalid)?,
            "backbone" => self.backbone = Backbone::parse(value.trim()).ok_or_else(invalid)?,
            "dim" => self.dim = num!(),
            "rounds" => self.rounds = num!(),
            "local_epochs" => self.local_epochs = num!(),
            "batch" => self.batch = num!(),
            "clients" => {
                self.clients = if value.trim().is_empty() {
                    None
                } else {
                    Some(num!())
                }
            }
            "eta" => self.eta = num!(),
            "lr_decay" => self.lr_decay = num!(),
            "beta" => self.beta = num!(),
            "gamma" => self.gamma = num!(),
            "seed" => self.seed = num!(),
            "eval_every" => self.eval_every = num!(),
            "workers" => self.workers = num!(),
            "repeats" => self.repeats = num!(),
            "min_interactions" => self.min_interactions = num!(),
            "train_neg_ratio" => self.train_neg_ratio = num!(),
            "eval_negatives" => self.eval_negatives = num!(),
            "top_k" => self.top_k = num!(),
            "trace_mixing" => self.trace_mixing = value.trim().parse().map_err(|_| invalid())?,
            "no_diagnostics" => {
                self.no_diagnostics = value.trim().parse().map_err(|_| invalid())?
            }
            "percent" => self.percent = value.trim().parse().map_err(|_| invalid())?,
            "out" => self.out = PathBuf::from(value.trim()),
            "sweep" => {
                self.sweep = if value.trim().is_empty() {
                    None
                } else {
                    Some(SweepSpec::parse(value.trim())?)
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Apply a flat key=value file on top of the current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let content = std::fs::read_to_string(path)?;
        for line in content.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::InvalidValue {
                key: line.into(),
                value: String::new(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |key: &str, ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange {
                    key: key.into(),
                    msg: msg.into(),
                })
            }
        };
        range("dim", self.dim >= 1, "must be >= 1")?;
        range("batch", self.batch >= 1, "must be >= 1")?;
        range("eta", self.eta > 0.0, "must be > 0")?;
        range(
            "lr_decay",
            self.lr_decay > 0.0 && self.lr_decay <= 1.0,
            "must be in (0, 1]",
        )?;
        range("beta", self.beta >= 0.0, "must be >= 0")?;
        range("gamma", self.gamma >= 0.0, "must be >= 0")?;
        range("eval_every", self.eval_every >= 1, "must be >= 1")?;
        range("workers", self.workers >= 1, "must be >= 1")?;
        range("repeats", self.repeats >= 1, "must be >= 1")?;
        range("top_k", self.top_k >= 1, "must be >= 1")?;
        if let Some(c) = self.clients {
            range("clients", c >= 1, "must be >= 1")?;
        }
        Ok(())
    }

    /// Flat key=value emission; `apply_file` on the output reconstructs the
    /// config exactly.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("data", self.data.display().to_string());
        kv("format", self.format.as_str().into());
        kv("strategy", self.strategy.as_str().into());
        kv("backbone", self.backbone.as_str().into());
        kv("dim", self.dim.to_string());
        kv("rounds", self.rounds.to_string());
        kv("local_epochs", self.local_epochs.to_string());
        kv("batch", self.batch.to_string());
        kv(
            "clients",
            self.clients.map(|c| c.to_string()).unwrap_or_default(),
        );
        kv("eta", self.eta.to_string());
        kv("lr_decay", self.lr_decay.to_string());
        kv("beta", self.beta.to_string());
        kv("gamma", self.gamma.to_string());
        kv("seed", self.seed.to_string());
        kv("eval_every", self.eval_every.to_string());
        kv("workers", self.workers.to_string());
        kv("repeats", self.repeats.to_string());
        kv("min_interactions", self.min_interactions.to_string());
        kv("train_neg_ratio", self.train_neg_ratio.to_string());
        kv("eval_negatives", self.eval_negatives.to_string());
        kv("top_k", self.top_k.to_string());
        kv("trace_mixing", self.trace_mixing.to_string());
        kv("no_diagnostics", self.no_diagnostics.to_string());
        kv("percent", self.percent.to_string());
        kv("out", self.out.display().to_string());
        kv(
            "sweep",
            self.sweep.as_ref().map(|s| s.emit()).unwrap_or_default(),
        );
        out
    }
}

/// Command-line flags. Unset flags fall back to the config file, then to the
/// defaults.
#[derive(Debug, Parser)]
#[command(name = "plgc", about = "Federated recommendation simulator")]
pub struct CliArgs {
    /// flat key=value config file applied below the CLI flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// tab | double_colon
    #[arg(long)]
    pub format: Option<String>,
    /// vanilla | dlgm_only | err_only | plgc
    #[arg(long)]
    pub strategy: Option<String>,
    /// mf | ncf
    #[arg(long)]
    pub backbone: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub local_epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub clients: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub lr_decay: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eval_every: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// NAME=v1,v2,... with NAME in {beta, gamma, d, eta}
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub trace_mixing: bool,
    #[arg(long)]
    pub no_diagnostics: bool,
    #[arg(long)]
    pub percent: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Defaults <- config file <- CLI flags, then validated.
pub fn resolve(args: &CliArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    if let Some(v) = &args.data {
        config.data = v.clone();
    }
    if let Some(v) = &args.format {
        config.set("format", v)?;
    }
    if let Some(v) = &args.strategy {
        config.set("strategy", v)?;
    }
    if let Some(v) = &args.backbone {
        config.set("backbone", v)?;
    }
    if let Some(v) = args.dim {
        config.dim = v;
    }
    if let Some(v) = args.rounds {
        config.rounds = v;
    }
    if let Some(v) = args.local_epochs {
        config.local_epochs = v;
    }
    if let Some(v) = args.batch {
        config.batch = v;
    }
    if let Some(v) = args.clients {
        config.clients = Some(v);
    }
    if let Some(v) = args.eta {
        config.eta = v;
    }
    if let Some(v) = args.lr_decay {
        config.lr_decay = v;
    }
    if let Some(v) = args.beta {
        config.beta = v;
    }
    if let Some(v) = args.gamma {
        config.gamma = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.eval_every {
        config.eval_every = v;
    }
    if let Some(v) = args.workers {
        config.workers = v;
    }
    if let Some(v) = &args.sweep {
        config.sweep = Some(SweepSpec::parse(v)?);
    }
    if let Some(v) = args.repeats {
        config.repeats = v;
    }
    if args.trace_mixing {
        config.trace_mixing = true;
    }
    if args.no_diagnostics {
        config.no_diagnostics = true;
    }
    if args.percent {
        config.percent = true;
    }
    if let Some(v) = &args.out {
        config.out = v.clone();
    }
    config.validate()?;
    Ok(config)
}
