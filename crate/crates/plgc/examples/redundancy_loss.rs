//! The embedding redundancy-reduction loss pushes the column-wise
//! cross-correlation matrix between projected local and global batch
//! representations toward the identity. This example evaluates the loss on
//! a maximally redundant batch and on a decorrelated one, then takes plain
//! gradient steps and watches the off-diagonal mass shrink.
//!
//! Run with: cargo run --example redundancy_loss

use plgc::plgc::{
    correlation_matrix, err_loss, plgc_backward, project_batch, BatchSample, ErrNetwork,
    MixCoefficients, PlgcHyper,
};
use plgc::{EmbeddingTable, UserVector};

fn off_diagonal_mass(h: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += h[i * d + j] * h[i * d + j];
            }
        }
    }
    s
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (b, d) = (16, 6);
    let gamma = 1.0;
    let net = ErrNetwork::identity(d);

    // all columns identical within a row: correlations saturate at 1
    let mut redundant = vec![0.0; b * d];
    for (i, row) in redundant.chunks_mut(d).enumerate() {
        row.fill(0.3 + 0.05 * i as f64);
    }
    // independent random columns: correlations hover near zero
    let varied: Vec<f64> = (0..b * d)
        .map(|i| ((i * 2654435761) % 1000) as f64 / 500.0 - 1.0)
        .collect();

    for (name, rows) in [("redundant", &redundant), ("varied", &varied)] {
        let z = project_batch(rows, b, &net).unwrap();
        let h = correlation_matrix(&z, &z, b, d);
        println!(
            "{name:>10}: err_loss = {:8.4}, off-diagonal mass = {:8.4}",
            err_loss(&h, d, gamma),
            off_diagonal_mass(&h, d)
        );
    }

    // now train: local table starts with strongly redundant columns
    // (one shared direction plus small per-column noise)
    println!("\ngradient steps on the redundancy loss alone (eta = 0.002):");
    let mut local = EmbeddingTable::random(b, d, 0.05, 8);
    for i in 0..b {
        let shared = 0.2 + 0.04 * i as f64;
        for v in local.row_mut(i) {
            *v += shared;
        }
    }
    let global = EmbeddingTable::random(b, d, 0.5, 9);
    let mut net = ErrNetwork::random(d, 0.3, 10);
    let user = UserVector::zeros(d);
    let batch: Vec<BatchSample> = (0..b)
        .map(|i| BatchSample { item_id: i, label: 1.0 })
        .collect();
    let hyper = PlgcHyper {
        beta: 1.0,
        gamma,
        ..PlgcHyper::default()
    };

    for step in 0..10 {
        let grads = plgc_backward(
            &user,
            &batch,
            &local,
            &global,
            MixCoefficients::pure_local(),
            &net,
            &hyper,
        )?;
        println!("  step {step}: err_loss = {:8.4}", grads.err_loss);
        for (&item, dc) in &grads.d_items {
            for (v, g) in local.row_mut(item).iter_mut().zip(dc) {
                *v -= 0.002 * g;
            }
        }
        net.scaled_add(&grads.d_net, -0.002);
    }
    Ok(())
}
