//! Dynamic local-global mixing: the personalized table is a convex
//! combination of the local and global tables, weighted by the ratio of
//! their Gram-matrix traces. As the local table grows in norm, the mix
//! shifts from global-dominated toward local-dominated.
//!
//! Run with: cargo run --example trace_mixing

use plgc::plgc::{gram_trace, mix_tables, mixing_coefficients};
use plgc::EmbeddingTable;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let global = EmbeddingTable::random(50, 8, 0.5, 1);
    let trace_global = gram_trace(&global);
    println!("tr(G^g) = {trace_global:.4}\n");
    println!("{:>8} {:>12} {:>10} {:>10}", "scale", "tr(G^n)", "lambda_c", "lambda_g");

    for scale in [0.05, 0.1, 0.25, 0.5, 1.0, 2.0] {
        let local = EmbeddingTable::random(50, 8, scale, 2);
        let trace_local = gram_trace(&local);
        let mix = mixing_coefficients(trace_local, trace_global)?;
        println!(
            "{scale:>8.2} {trace_local:>12.4} {:>10.4} {:>10.4}",
            mix.lambda_c, mix.lambda_g
        );

        // the mixed table is the entrywise convex combination
        let q = mix_tables(&local, &global, mix)?;
        let expect = mix.lambda_c * local.values()[0] + mix.lambda_g * global.values()[0];
        assert!((q.values()[0] - expect).abs() < 1e-12);
    }

    println!("\nlambda_c + lambda_g = 1 always; a stronger local table earns more weight.");
    Ok(())
}
