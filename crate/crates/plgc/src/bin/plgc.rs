use clap::Parser;
use plgc::config::{CliArgs, ExperimentConfig};
use plgc::runner;
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let args = CliArgs::parse();
    let config = match plgc::config::resolve(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(config: ExperimentConfig) -> Result<(), runner::RunnerError> {
    let started = Instant::now();
    let scale = if config.percent { 100.0 } else { 1.0 };
    let split = runner::load_split(&config)?;
    println!(
        "dataset: {} users, {} items, {} positives",
        split.num_users,
        split.num_items,
        split.num_users + split.train.iter().map(|t| t.len() + 1).sum::<usize>()
    );
    if let Some(sweep) = config.sweep.clone() {
        let results = runner::run_sweep(&split, &config)?;
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_millis();
        let dir = config.out.join(format!("sweep-{stamp}"));
        std::fs::create_dir_all(&dir)?;
        runner::write_sweep_summary(
            sweep.param,
            &results,
            config.percent,
            &dir.join("sweep_summary.csv"),
        )?;
        for (value, result) in &results {
            println!(
                "{}={:<8} HR@{} {:.4}  NDCG@{} {:.4}",
                sweep.param.as_str(),
                value,
                config.top_k,
                result.mean_test_hr() * scale,
                config.top_k,
                result.mean_test_ndcg() * scale
            );
        }
        println!("sweep summary written to {}", dir.display());
    } else {
        let result = runner::run_experiment(&config)?;
        let dir = runner::emit_reports(&result, started)?;
        for (s, _) in &result.per_seed {
            println!(
                "seed {}: best round {}  val HR {:.4}  test HR {:.4}  test NDCG {:.4}",
                s.seed,
                s.best_round,
                s.val_hr * scale,
                s.test_hr * scale,
                s.test_ndcg * scale
            );
        }
        println!(
            "mean test HR@{} {:.4}  NDCG@{} {:.4}",
            config.top_k,
            result.mean_test_hr() * scale,
            config.top_k,
            result.mean_test_ndcg() * scale
        );
        println!("reports written to {}", dir.display());
    }
    Ok(())
}
