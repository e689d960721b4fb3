//! Experiment runner: dataset loading, repeated seeded runs, sweeps, and
//! artifact emission.

use crate::config::{ExperimentConfig, SweepParam};
use crate::data::{leave_one_out, load_ratings, to_implicit, InteractionSplit};
use crate::embedding;
use crate::federation::{
    write_mixing_trace, write_round_reports, FederationError, Simulation, SimulationConfig,
    TrainingOutcome,
};
use crate::plgc::PlgcHyper;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Federation(#[from] FederationError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("backbone {0} not implemented; use mf")]
    UnsupportedBackbone(String),
    #[error("sweep {param} failed at value {value}: {source}")]
    SweepRun {
        param: String,
        value: f64,
        #[source]
        source: Box<RunnerError>,
    },
}

/// One seed's end-of-run numbers: metrics at the best-validation round.
#[derive(Debug, Clone, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub best_round: usize,
    pub val_hr: f64,
    pub val_ndcg: f64,
    pub test_hr: f64,
    pub test_ndcg: f64,
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub per_seed: Vec<(SeedSummary, TrainingOutcome)>,
}

impl ExperimentResult {
    pub fn mean_test_hr(&self) -> f64 {
        let n = self.per_seed.len() as f64;
        self.per_seed.iter().map(|(s, _)| s.test_hr).sum::<f64>() / n
    }

    pub fn mean_test_ndcg(&self) -> f64 {
        let n = self.per_seed.len() as f64;
        self.per_seed.iter().map(|(s, _)| s.test_ndcg).sum::<f64>() / n
    }
}

pub fn simulation_config(config: &ExperimentConfig, seed: u64) -> SimulationConfig {
    SimulationConfig {
        dim: config.dim,
        rounds: config.rounds,
        clients_per_round: config.clients,
        train_neg_ratio: config.train_neg_ratio,
        eval_negatives: config.eval_negatives,
        top_k: config.top_k,
        seed,
        eval_every: config.eval_every,
        workers: config.workers,
        trace_mixing: config.trace_mixing,
        compute_ia: !config.no_diagnostics,
        ..SimulationConfig::default()
    }
}

pub fn hyper(config: &ExperimentConfig) -> PlgcHyper {
    PlgcHyper {
        beta: config.beta,
        gamma: config.gamma,
        local_epochs: config.local_epochs,
        batch_size: config.batch,
        learning_rate: config.eta,
        lr_decay: config.lr_decay,
    }
}

pub fn load_split(config: &ExperimentConfig) -> Result<InteractionSplit, RunnerError> {
    let log = load_ratings(&config.data, config.format)?;
    let dataset = to_implicit(&log, config.min_interactions)?;
    Ok(leave_one_out(&dataset)?)
}

/// Run one training per seed (seed, seed+1, ..) on a pre-built split.
pub fn run_on_split(
    split: &InteractionSplit,
    config: &ExperimentConfig,
) -> Result<ExperimentResult, RunnerError> {
    if config.backbone != crate::config::Backbone::Mf {
        return Err(RunnerError::UnsupportedBackbone(
            config.backbone.as_str().into(),
        ));
    }
    let mut per_seed = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let seed = config.seed + r as u64;
        let mut sim = Simulation::new(
            split.clone(),
            config.strategy,
            hyper(config),
            simulation_config(config, seed),
        )?;
        let outcome = sim.run_training()?;
        let best = outcome.best.as_ref().expect("training always evaluates");
        per_seed.push((
            SeedSummary {
                seed,
                best_round: best.round,
                val_hr: best.val.hr,
                val_ndcg: best.val.ndcg,
                test_hr: best.test.hr,
                test_ndcg: best.test.ndcg,
            },
            outcome,
        ));
    }
    Ok(ExperimentResult {
        config: config.clone(),
        per_seed,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, RunnerError> {
    let split = load_split(config)?;
    run_on_split(&split, config)
}

/// One full run per sweep value, shared seed, overriding a single parameter.
pub fn run_sweep(
    split: &InteractionSplit,
    config: &ExperimentConfig,
) -> Result<Vec<(f64, ExperimentResult)>, RunnerError> {
    let sweep = config.sweep.as_ref().expect("run_sweep requires a sweep");
    let mut results = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let mut variant = config.clone();
        variant.sweep = None;
        match sweep.param {
            SweepParam::Beta => variant.beta = value,
            SweepParam::Gamma => variant.gamma = value,
            SweepParam::Dim => variant.dim = value as usize,
            SweepParam::Eta => variant.eta = value,
        }
        variant.validate()?;
        let result = run_on_split(split, &variant).map_err(|source| RunnerError::SweepRun {
            param: sweep.param.as_str().into(),
            value,
            source: Box::new(source),
        })?;
        results.push((value, result));
    }
    Ok(results)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    git_describe: String,
    wall_seconds: f64,
    summaries: &'a [SeedSummary],
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

fn write_summary_csv(
    summaries: &[SeedSummary],
    percent: bool,
    path: &Path,
) -> Result<(), RunnerError> {
    let scale = if percent { 100.0 } else { 1.0 };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "seed,best_round,val_hr,val_ndcg,test_hr,test_ndcg")?;
    for s in summaries {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            s.seed,
            s.best_round,
            s.val_hr * scale,
            s.val_ndcg * scale,
            s.test_hr * scale,
            s.test_ndcg * scale
        )?;
    }
    let n = summaries.len() as f64;
    let mean = |f: fn(&SeedSummary) -> f64| summaries.iter().map(f).sum::<f64>() / n;
    writeln!(
        out,
        "mean,,{:.6},{:.6},{:.6},{:.6}",
        mean(|s| s.val_hr) * scale,
        mean(|s| s.val_ndcg) * scale,
        mean(|s| s.test_hr) * scale,
        mean(|s| s.test_ndcg) * scale
    )?;
    Ok(())
}

fn write_timing_csv(result: &ExperimentResult, path: &Path) -> Result<(), RunnerError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "seed,round,seconds")?;
    for (summary, outcome) in &result.per_seed {
        for r in &outcome.rounds {
            writeln!(out, "{},{},{:.3}", summary.seed, r.round, r.seconds)?;
        }
    }
    Ok(())
}

fn write_spectrum_csv(result: &ExperimentResult, path: &Path) -> Result<(), RunnerError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "table_role,user_id,dim_index,log10_sigma")?;
    let floor = 1e-300_f64;
    for (summary, outcome) in &result.per_seed {
        let Some(best) = &outcome.best else { continue };
        let seed = summary.seed;
        for (i, sv) in best.global_spectrum.iter().enumerate() {
            writeln!(
                out,
                "global_seed{seed},,{},{:.9}",
                i,
                sv.max(floor).log10()
            )?;
        }
        for (user, local_sv, pers_sv) in &best.client_spectra {
            for (i, sv) in local_sv.iter().enumerate() {
                writeln!(
                    out,
                    "local_seed{seed},{user},{},{:.9}",
                    i,
                    sv.max(floor).log10()
                )?;
            }
            for (i, sv) in pers_sv.iter().enumerate() {
                writeln!(
                    out,
                    "personalized_seed{seed},{user},{},{:.9}",
                    i,
                    sv.max(floor).log10()
                )?;
            }
        }
    }
    Ok(())
}

/// Emit all run artifacts into a timestamped subdirectory of the configured
/// output root. Returns the directory written.
pub fn emit_reports(
    result: &ExperimentResult,
    started: Instant,
) -> Result<PathBuf, RunnerError> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap()
        .as_millis();
    let dir = result.config.out.join(format!("run-{stamp}"));
    std::fs::create_dir_all(&dir)?;

    let summaries: Vec<SeedSummary> = result.per_seed.iter().map(|(s, _)| s.clone()).collect();
    for (summary, outcome) in &result.per_seed {
        let suffix = if result.per_seed.len() == 1 {
            String::new()
        } else {
            format!("_seed{}", summary.seed)
        };
        write_round_reports(&outcome.rounds, false, &dir.join(format!("metrics{suffix}.csv")))?;
        if result.config.trace_mixing {
            write_mixing_trace(
                &outcome.mixing_trace,
                &dir.join(format!("mixing_trace{suffix}.csv")),
            )?;
        }
        if !result.config.no_diagnostics {
            if let Some(best) = &outcome.best {
                if let Some(ia) = &best.ia {
                    ia.write_csv(&dir.join(format!("ia{suffix}.csv")))
                        .map_err(FederationError::Eval)?;
                }
            }
            embedding::export_table(
                &outcome.final_global,
                "global",
                result.config.rounds,
                &dir.join(format!("global{suffix}.tsv")),
            )
            .map_err(|e| RunnerError::Io(std::io::Error::other(e.to_string())))?;
        }
    }
    write_summary_csv(&summaries, result.config.percent, &dir.join("summary.csv"))?;
    if !result.config.no_diagnostics {
        write_spectrum_csv(result, &dir.join("spectrum.csv"))?;
        write_timing_csv(result, &dir.join("timing.csv"))?;
        std::fs::write(dir.join("config.txt"), result.config.emit())?;
    }
    let manifest = Manifest {
        config: &result.config,
        git_describe: git_describe(),
        wall_seconds: started.elapsed().as_secs_f64(),
        summaries: &summaries,
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).unwrap(),
    )?;
    Ok(dir)
}

/// Summary CSV across sweep values: one row per (value, seed) plus a mean
/// row per value.
pub fn write_sweep_summary(
    param: SweepParam,
    results: &[(f64, ExperimentResult)],
    percent: bool,
    path: &Path,
) -> Result<(), RunnerError> {
    let scale = if percent { 100.0 } else { 1.0 };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "param,value,seed,test_hr,test_ndcg")?;
    for (value, result) in results {
        for (s, _) in &result.per_seed {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6}",
                param.as_str(),
                value,
                s.seed,
                s.test_hr * scale,
                s.test_ndcg * scale
            )?;
        }
        writeln!(
            out,
            "{},{},mean,{:.6},{:.6}",
            param.as_str(),
            value,
            result.mean_test_hr() * scale,
            result.mean_test_ndcg() * scale
        )?;
    }
    Ok(())
}
