//! Dynamic local-global mixing (dLGM) and embedding redundancy reduction
//! (eRR), composed into the per-client training objective.

use crate::backbone::{dot, sigmoid, SCORE_EPS};
use crate::embedding::{EmbeddingTable, UserVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;
use thiserror::Error;

/// Stabilizer added to each column norm in the correlation matrix.
pub const CORR_EPS: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PlgcError {
    #[error("shape mismatch between tables")]
    ShapeMismatch,
    #[error("degenerate mixing: both Gram traces are zero")]
    DegenerateMixing,
    #[error("non-finite gradient (round {round}, epoch {epoch}, batch {batch})")]
    TrainingDivergence {
        round: usize,
        epoch: usize,
        batch: usize,
    },
}

/// The (lambda_c, lambda_g) pair recomputed at each local epoch start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixCoefficients {
    pub lambda_c: f64,
    pub lambda_g: f64,
}

impl MixCoefficients {
    pub fn pure_local() -> Self {
        MixCoefficients {
            lambda_c: 1.0,
            lambda_g: 0.0,
        }
    }
}

/// Training hyper-parameters shared by every client.
#[derive(Debug, Clone, Copy)]
pub struct PlgcHyper {
    pub beta: f64,
    pub gamma: f64,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
}

impl Default for PlgcHyper {
    fn default() -> Self {
        PlgcHyper {
            beta: 0.5,
            gamma: 0.01,
            local_epochs: 10,
            batch_size: 2048,
            learning_rate: 0.1,
            lr_decay: 0.98,
        }
    }
}

/// Trace of the full item-space Gram matrix E E^T, via column norms.
pub fn gram_trace(table: &EmbeddingTable) -> f64 {
    table.gram_trace()
}

/// lambda_c = tr_local / (tr_local + tr_global), lambda_g = 1 - lambda_c.
pub fn mixing_coefficients(
    trace_local: f64,
    trace_global: f64,
) -> Result<MixCoefficients, PlgcError> {
    let total = trace_local + trace_global;
    if total <= 0.0 {
        return Err(PlgcError::DegenerateMixing);
    }
    let lambda_c = trace_local / total;
    Ok(MixCoefficients {
        lambda_c,
        lambda_g: 1.0 - lambda_c,
    })
}

/// Q = lambda_c * C + lambda_g * G, element-wise.
pub fn mix_tables(
    local: &EmbeddingTable,
    global: &EmbeddingTable,
    mix: MixCoefficients,
) -> Result<EmbeddingTable, PlgcError> {
    if !local.same_shape(global) {
        return Err(PlgcError::ShapeMismatch);
    }
    let values = local
        .values()
        .iter()
        .zip(global.values())
        .map(|(c, g)| mix.lambda_c * c + mix.lambda_g * g)
        .collect();
    Ok(EmbeddingTable::from_values(local.rows(), local.dim(), values))
}

/// Projector (linear d->d + ReLU) followed by a predictor (linear d->d),
/// shared between the local and global branches. Parameters never leave the
/// client.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrNetwork {
    pub dim: usize,
    /// projector weight, row-major d x d
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// predictor weight, row-major d x d
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl ErrNetwork {
    pub fn random(dim: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, scale).unwrap();
        let mut sample = |n: usize| -> Vec<f64> {
            (0..n).map(|_| normal.sample(&mut rng)).collect()
        };
        ErrNetwork {
            dim,
            w1: sample(dim * dim),
            b1: vec![0.0; dim],
            w2: sample(dim * dim),
            b2: vec![0.0; dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut w = vec![0.0; dim * dim];
        for i in 0..dim {
            w[i * dim + i] = 1.0;
        }
        ErrNetwork {
            dim,
            w1: w.clone(),
            b1: vec![0.0; dim],
            w2: w,
            b2: vec![0.0; dim],
        }
    }

    pub fn zeros_like(&self) -> Self {
        ErrNetwork {
            dim: self.dim,
            w1: vec![0.0; self.dim * self.dim],
            b1: vec![0.0; self.dim],
            w2: vec![0.0; self.dim * self.dim],
            b2: vec![0.0; self.dim],
        }
    }

    pub fn scaled_add(&mut self, other: &ErrNetwork, factor: f64) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.w1.iter_mut().zip(&other.w1) {
            *a += factor * b;
        }
        for (a, b) in self.b1.iter_mut().zip(&other.b1) {
            *a += factor * b;
        }
        for (a, b) in self.w2.iter_mut().zip(&other.w2) {
            *a += factor * b;
        }
        for (a, b) in self.b2.iter_mut().zip(&other.b2) {
            *a += factor * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
            && self.w2.iter().all(|v| v.is_finite())
            && self.b2.iter().all(|v| v.is_finite())
    }

    /// Forward pass over a flat B x d row-major batch. Returns the
    /// pre-activation of the projector (needed for backprop) and the output.
    fn forward(&self, rows: &[f64], batch: usize) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim;
        debug_assert_eq!(rows.len(), batch * d);
        let mut pre = vec![0.0; batch * d];
        let mut out = vec![0.0; batch * d];
        for i in 0..batch {
            let x = &rows[i * d..(i + 1) * d];
            let u = &mut pre[i * d..(i + 1) * d];
            for j in 0..d {
                u[j] = dot(&self.w1[j * d..(j + 1) * d], x) + self.b1[j];
            }
            let h: Vec<f64> = u.iter().map(|&v| v.max(0.0)).collect();
            let z = &mut out[i * d..(i + 1) * d];
            for j in 0..d {
                z[j] = dot(&self.w2[j * d..(j + 1) * d], &h) + self.b2[j];
            }
        }
        (pre, out)
    }
}

/// Batch-process embedding rows through the shared projector/predictor.
/// Returns `None` for batches of fewer than two rows (skip-eRR signal).
pub fn project_batch(rows: &[f64], batch: usize, net: &ErrNetwork) -> Option<Vec<f64>> {
    if batch < 2 {
        return None;
    }
    Some(net.forward(rows, batch).1)
}

/// Column-cosine matrix between two B x d batches, flat row-major d x d.
pub fn correlation_matrix(z_c: &[f64], z_g: &[f64], batch: usize, dim: usize) -> Vec<f64> {
    debug_assert_eq!(z_c.len(), batch * dim);
    debug_assert_eq!(z_g.len(), batch * dim);
    let mut norm_c = vec![0.0; dim];
    let mut norm_g = vec![0.0; dim];
    for i in 0..batch {
        for j in 0..dim {
            norm_c[j] += z_c[i * dim + j] * z_c[i * dim + j];
            norm_g[j] += z_g[i * dim + j] * z_g[i * dim + j];
        }
    }
    for v in norm_c.iter_mut().chain(norm_g.iter_mut()) {
        *v = v.sqrt() + CORR_EPS;
    }
    let mut h = vec![0.0; dim * dim];
    for row in 0..batch {
        let zc = &z_c[row * dim..(row + 1) * dim];
        let zg = &z_g[row * dim..(row + 1) * dim];
        for i in 0..dim {
            let zci = zc[i];
            if zci == 0.0 {
                continue;
            }
            let hrow = &mut h[i * dim..(i + 1) * dim];
            for j in 0..dim {
                hrow[j] += zci * zg[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            h[i * dim + j] /= norm_c[i] * norm_g[j];
        }
    }
    h
}

/// L_eRR = (1/d) sum_i (1 - H_ii)^2 + (gamma/d) sum_{i != j} H_ij^2.
pub fn err_loss(h: &[f64], dim: usize, gamma: f64) -> f64 {
    let mut diag = 0.0;
    let mut off = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let v = h[i * dim + j];
            if i == j {
                diag += (1.0 - v) * (1.0 - v);
            } else {
                off += v * v;
            }
        }
    }
    (diag + gamma * off) / dim as f64
}

/// L = L_rec + beta * L_eRR.
pub fn total_loss(rec: f64, err: f64, beta: f64) -> f64 {
    rec + beta * err
}

#[derive(Debug, Clone, Copy)]
pub struct BatchSample {
    pub item_id: usize,
    pub label: f64,
}

/// Gradients of the composed per-batch objective, plus the loss components.
#[derive(Debug)]
pub struct BatchGradients {
    pub d_user: Vec<f64>,
    /// gradient w.r.t. the local table rows, keyed by item id (duplicate
    /// batch occurrences summed)
    pub d_items: BTreeMap<usize, Vec<f64>>,
    pub d_net: ErrNetwork,
    pub rec_loss: f64,
    pub err_loss: f64,
}

impl BatchGradients {
    pub fn is_finite(&self) -> bool {
        self.d_user.iter().all(|v| v.is_finite())
            && self.d_items.values().flatten().all(|v| v.is_finite())
            && self.d_net.is_finite()
            && self.rec_loss.is_finite()
            && self.err_loss.is_finite()
    }
}

/// Full backward pass for one batch of the composed loss.
///
/// Conventions: the mixing coefficients are constants within an epoch
/// (no gradient through the trace ratio); G is frozen, so the scoring path
/// contributes lambda_c * dL/dQ to the local rows; the global eRR branch
/// feeds the network parameters only.
pub fn plgc_backward(
    user: &UserVector,
    batch: &[BatchSample],
    local: &EmbeddingTable,
    global: &EmbeddingTable,
    mix: MixCoefficients,
    net: &ErrNetwork,
    hyper: &PlgcHyper,
) -> Result<BatchGradients, PlgcError> {
    if !local.same_shape(global) || user.dim() != local.dim() {
        return Err(PlgcError::ShapeMismatch);
    }
    let d = local.dim();
    let b = batch.len();
    let inv_b = 1.0 / b as f64;
    let p = user.values();

    let mut d_user = vec![0.0; d];
    let mut d_items: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut rec_loss = 0.0;

    // scoring path through Q = lambda_c C + lambda_g G
    let mut q_row = vec![0.0; d];
    for sample in batch {
        let c_row = local.row(sample.item_id);
        let g_row = global.row(sample.item_id);
        for k in 0..d {
            q_row[k] = mix.lambda_c * c_row[k] + mix.lambda_g * g_row[k];
        }
        let s = sigmoid(dot(p, &q_row)).clamp(SCORE_EPS, 1.0 - SCORE_EPS);
        rec_loss -= sample.label * s.ln() + (1.0 - sample.label) * (1.0 - s).ln();
        let coeff = (s - sample.label) * inv_b;
        for k in 0..d {
            d_user[k] += coeff * q_row[k];
        }
        let dc = d_items
            .entry(sample.item_id)
            .or_insert_with(|| vec![0.0; d]);
        let c_coeff = mix.lambda_c * coeff;
        for k in 0..d {
            dc[k] += c_coeff * p[k];
        }
    }
    rec_loss *= inv_b;

    let mut d_net = net.zeros_like();
    let mut err = 0.0;

    if b >= 2 && hyper.beta > 0.0 {
        let mut rows_c = vec![0.0; b * d];
        let mut rows_g = vec![0.0; b * d];
        for (i, sample) in batch.iter().enumerate() {
            rows_c[i * d..(i + 1) * d].copy_from_slice(local.row(sample.item_id));
            rows_g[i * d..(i + 1) * d].copy_from_slice(global.row(sample.item_id));
        }
        let (pre_c, z_c) = net.forward(&rows_c, b);
        let (pre_g, z_g) = net.forward(&rows_g, b);
        let h = correlation_matrix(&z_c, &z_g, b, d);
        err = err_loss(&h, d, hyper.gamma);

        // dL/dH, already scaled by beta
        let mut dh = vec![0.0; d * d];
        let inv_d = 1.0 / d as f64;
        for i in 0..d {
            for j in 0..d {
                let v = h[i * d + j];
                dh[i * d + j] = if i == j {
                    hyper.beta * 2.0 * inv_d * (v - 1.0)
                } else {
                    hyper.beta * 2.0 * hyper.gamma * inv_d * v
                };
            }
        }

        // column norms (raw, without eps) and stabilized denominators
        let mut raw_c = vec![0.0; d];
        let mut raw_g = vec![0.0; d];
        for i in 0..b {
            for j in 0..d {
                raw_c[j] += z_c[i * d + j] * z_c[i * d + j];
                raw_g[j] += z_g[i * d + j] * z_g[i * d + j];
            }
        }
        for v in raw_c.iter_mut().chain(raw_g.iter_mut()) {
            *v = v.sqrt();
        }
        let den_c: Vec<f64> = raw_c.iter().map(|v| v + CORR_EPS).collect();
        let den_g: Vec<f64> = raw_g.iter().map(|v| v + CORR_EPS).collect();

        // dL/dZ_c[:,i] = sum_j dh_ij (Z_g[:,j]/(Nc_i Ng_j) - H_ij Z_c[:,i]/(Nc_i |c_i|))
        // and symmetrically for Z_g
        let mut dz_c = vec![0.0; b * d];
        let mut dz_g = vec![0.0; b * d];
        for i in 0..d {
            // self-term coefficient for column i of Z_c
            let mut self_coeff = 0.0;
            for j in 0..d {
                let g_h = dh[i * d + j];
                if g_h == 0.0 {
                    continue;
                }
                let cross = g_h / (den_c[i] * den_g[j]);
                for row in 0..b {
                    dz_c[row * d + i] += cross * z_g[row * d + j];
                }
                if raw_c[i] > 0.0 {
                    self_coeff += g_h * h[i * d + j] / (den_c[i] * raw_c[i]);
                }
            }
            if self_coeff != 0.0 {
                for row in 0..b {
                    dz_c[row * d + i] -= self_coeff * z_c[row * d + i];
                }
            }
        }
        for j in 0..d {
            let mut self_coeff = 0.0;
            for i in 0..d {
                let g_h = dh[i * d + j];
                if g_h == 0.0 {
                    continue;
                }
                let cross = g_h / (den_c[i] * den_g[j]);
                for row in 0..b {
                    dz_g[row * d + j] += cross * z_c[row * d + i];
                }
                if raw_g[j] > 0.0 {
                    self_coeff += g_h * h[i * d + j] / (den_g[j] * raw_g[j]);
                }
            }
            if self_coeff != 0.0 {
                for row in 0..b {
                    dz_g[row * d + j] -= self_coeff * z_g[row * d + j];
                }
            }
        }

        // backprop through the shared network; local branch also reaches C
        let d_rows_c = backprop_net(net, &rows_c, &pre_c, &dz_c, b, &mut d_net, true);
        backprop_net(net, &rows_g, &pre_g, &dz_g, b, &mut d_net, false);
        let d_rows_c = d_rows_c.unwrap();
        for (i, sample) in batch.iter().enumerate() {
            let dc = d_items
                .entry(sample.item_id)
                .or_insert_with(|| vec![0.0; d]);
            for k in 0..d {
                dc[k] += d_rows_c[i * d + k];
            }
        }
    }

    Ok(BatchGradients {
        d_user,
        d_items,
        d_net,
        rec_loss,
        err_loss: err,
    })
}

/// Accumulate network gradients for one branch; returns the gradient w.r.t.
/// the input rows when requested.
fn backprop_net(
    net: &ErrNetwork,
    rows: &[f64],
    pre: &[f64],
    dz: &[f64],
    batch: usize,
    grads: &mut ErrNetwork,
    want_input_grad: bool,
) -> Option<Vec<f64>> {
    let d = net.dim;
    let mut d_rows = if want_input_grad {
        Some(vec![0.0; batch * d])
    } else {
        None
    };
    let mut du = vec![0.0; d];
    let mut h = vec![0.0; d];
    for i in 0..batch {
        let x = &rows[i * d..(i + 1) * d];
        let u = &pre[i * d..(i + 1) * d];
        let dzi = &dz[i * d..(i + 1) * d];
        for k in 0..d {
            h[k] = u[k].max(0.0);
        }
        // predictor: z = W2 h + b2
        for j in 0..d {
            let dzj = dzi[j];
            if dzj == 0.0 {
                continue;
            }
            grads.b2[j] += dzj;
            let wrow = &mut grads.w2[j * d..(j + 1) * d];
            for k in 0..d {
                wrow[k] += dzj * h[k];
            }
        }
        // dh = W2^T dz, then ReLU mask
        for k in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += net.w2[j * d + k] * dzi[j];
            }
            du[k] = if u[k] > 0.0 { acc } else { 0.0 };
        }
        // projector: u = W1 x + b1
        for j in 0..d {
            let duj = du[j];
            if duj == 0.0 {
                continue;
            }
            grads.b1[j] += duj;
            let wrow = &mut grads.w1[j * d..(j + 1) * d];
            for k in 0..d {
                wrow[k] += duj * x[k];
            }
        }
        if let Some(d_rows) = d_rows.as_mut() {
            let out = &mut d_rows[i * d..(i + 1) * d];
            for k in 0..d {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += net.w1[j * d + k] * du[j];
                }
                out[k] = acc;
            }
        }
    }
    d_rows
}
