//! Hyper-parameter sweep through the experiment runner: write a synthetic
//! ratings file, then sweep the off-diagonal weight gamma and emit the
//! sweep summary CSV exactly as the command-line interface would.
//!
//! Run with: cargo run --release --example sweep_gamma

use plgc::config::{ExperimentConfig, SweepSpec};
use plgc::data::{synthetic, write_ratings, RatingsFormat};
use plgc::runner;
use plgc::Strategy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let data = dir.path().join("ratings.tsv");
    write_ratings(&synthetic::ratings(30, 200, 4, 20, 3), RatingsFormat::Tab, &data)?;

    let config = ExperimentConfig {
        data,
        strategy: Strategy::Plgc,
        dim: 8,
        rounds: 20,
        local_epochs: 5,
        batch: 32,
        eta: 1.0,
        eval_negatives: 99,
        seed: 11,
        sweep: Some(SweepSpec::parse("gamma=0.001,0.01,0.1")?),
        out: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };

    let split = runner::load_split(&config)?;
    let results = runner::run_sweep(&split, &config)?;
    let summary = dir.path().join("sweep_summary.csv");
    runner::write_sweep_summary(
        config.sweep.as_ref().unwrap().param,
        &results,
        false,
        &summary,
    )?;

    for (gamma, result) in &results {
        println!(
            "gamma = {gamma:<6}: mean test HR@10 {:.4}, NDCG@10 {:.4}",
            result.mean_test_hr(),
            result.mean_test_ndcg()
        );
    }
    println!("\n{}", std::fs::read_to_string(summary)?);
    Ok(())
}
