//! Information abundance and singular-spectrum diagnostics on three tables:
//! a full-rank random table, a rank-1 (fully collapsed) table, and a table
//! whose spectrum decays geometrically.
//!
//! Run with: cargo run --example information_abundance

use plgc::EmbeddingTable;

fn describe(name: &str, table: &EmbeddingTable) {
    let sv = table.singular_values();
    let ia = table.information_abundance().unwrap();
    println!(
        "{name:>10}: IA = {ia:7.4} of max {},  sigma_max = {:.4},  sigma_min = {:.2e}",
        table.dim().min(table.rows()),
        sv.first().unwrap(),
        sv.last().unwrap()
    );
}

fn main() {
    let (rows, dim) = (200, 16);

    let random = EmbeddingTable::random(rows, dim, 1.0, 42);

    // every row is the same vector: one nonzero singular value
    let mut collapsed = EmbeddingTable::zeros(rows, dim);
    for r in 0..rows {
        for (k, v) in collapsed.row_mut(r).iter_mut().enumerate() {
            *v = (k as f64 + 1.0).sin();
        }
    }

    // column k scaled by 0.5^k: spectrum decays geometrically
    let mut decaying = EmbeddingTable::random(rows, dim, 1.0, 43);
    for r in 0..rows {
        for (k, v) in decaying.row_mut(r).iter_mut().enumerate() {
            *v *= 0.5_f64.powi(k as i32);
        }
    }

    describe("random", &random);
    describe("collapsed", &collapsed);
    describe("decaying", &decaying);

    println!("\nlog10 spectrum of the decaying table:");
    let report = decaying.spectrum().unwrap();
    for (i, sv) in report.singular_values.iter().enumerate() {
        println!("  sigma_{i:<2} {:8.4}  log10 {:+.3}", sv, sv.log10());
    }
}
