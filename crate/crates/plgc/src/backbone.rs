//! Matrix-factorization scoring head: sigmoid dot-product, binary
//! cross-entropy, and its analytic gradients.

use crate::embedding::UserVector;
use std::collections::BTreeMap;
use thiserror::Error;

/// Clamp applied to scores before taking logs.
pub const SCORE_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BackboneError {
    #[error("dimension mismatch: user {0} vs item {1}")]
    DimMismatch(usize, usize),
    #[error("empty batch")]
    EmptyBatch,
}

#[derive(Debug, Clone, Copy)]
pub struct Prediction {
    pub score: f64,
    pub label: f64,
    pub item_id: usize,
}

/// Gradient of the mean BCE with respect to the user vector and each item
/// vector that appeared in the batch.
#[derive(Debug, Clone)]
pub struct BackboneGradients {
    pub d_user: Vec<f64>,
    pub d_items: BTreeMap<usize, Vec<f64>>,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// sigma(p . q), clamped into (eps, 1 - eps).
pub fn score(user: &UserVector, item: &[f64]) -> Result<f64, BackboneError> {
    if user.dim() != item.len() {
        return Err(BackboneError::DimMismatch(user.dim(), item.len()));
    }
    let s = sigmoid(dot(user.values(), item));
    Ok(s.clamp(SCORE_EPS, 1.0 - SCORE_EPS))
}

/// Mean binary cross-entropy over the batch.
pub fn bce_loss(batch: &[Prediction]) -> Result<f64, BackboneError> {
    if batch.is_empty() {
        return Err(BackboneError::EmptyBatch);
    }
    let sum: f64 = batch
        .iter()
        .map(|p| {
            let s = p.score.clamp(SCORE_EPS, 1.0 - SCORE_EPS);
            p.label * s.ln() + (1.0 - p.label) * (1.0 - s).ln()
        })
        .sum();
    Ok(-sum / batch.len() as f64)
}

/// Analytic gradients of the mean BCE: d/d(p.q) = (score - label) / B.
pub fn bce_gradients(
    user: &UserVector,
    items: &[(&[f64], f64, usize)],
) -> Result<BackboneGradients, BackboneError> {
    if items.is_empty() {
        return Err(BackboneError::EmptyBatch);
    }
    let d = user.dim();
    let inv_b = 1.0 / items.len() as f64;
    let mut d_user = vec![0.0; d];
    let mut d_items: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(q, label, item_id) in items {
        let s = score(user, q)?;
        let coeff = (s - label) * inv_b;
        for (du, &qj) in d_user.iter_mut().zip(q) {
            *du += coeff * qj;
        }
        let dq = d_items.entry(item_id).or_insert_with(|| vec![0.0; d]);
        for (dqj, &pj) in dq.iter_mut().zip(user.values()) {
            *dqj += coeff * pj;
        }
    }
    Ok(BackboneGradients { d_user, d_items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn user(values: Vec<f64>) -> UserVector {
        let mut u = UserVector::zeros(values.len());
        u.values_mut().copy_from_slice(&values);
        u
    }

    #[test]
    fn score_orthogonal_is_half() {
        let p = user(vec![1.0, 0.0]);
        assert_eq!(score(&p, &[0.0, 3.0]).unwrap(), 0.5);
    }

    #[test]
    fn score_all_ones_d4() {
        let p = user(vec![1.0; 4]);
        let s = score(&p, &[1.0; 4]).unwrap();
        assert!((s - sigmoid(4.0)).abs() < 1e-15);
        assert!((s - 0.9820).abs() < 1e-4);
    }

    #[test]
    fn score_zero_user_is_half_everywhere() {
        let p = user(vec![0.0; 3]);
        for q in [[1.0, 2.0, 3.0], [-5.0, 0.0, 9.0]] {
            assert_eq!(score(&p, &q).unwrap(), 0.5);
        }
    }

    #[test]
    fn score_dim_mismatch() {
        let p = user(vec![1.0, 2.0]);
        assert!(matches!(
            score(&p, &[1.0]),
            Err(BackboneError::DimMismatch(2, 1))
        ));
    }

    #[test]
    fn score_complement_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let p = user((0..6).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let q: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let neg: Vec<f64> = q.iter().map(|v| -v).collect();
            let sum = score(&p, &q).unwrap() + score(&p, &neg).unwrap();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bce_single_sample_half_score() {
        let batch = [Prediction {
            score: 0.5,
            label: 1.0,
            item_id: 0,
        }];
        let l = bce_loss(&batch).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn bce_perfect_predictions_near_zero() {
        let batch = [
            Prediction {
                score: 1.0 - SCORE_EPS,
                label: 1.0,
                item_id: 0,
            },
            Prediction {
                score: SCORE_EPS,
                label: 0.0,
                item_id: 1,
            },
        ];
        assert!(bce_loss(&batch).unwrap() < 1e-10);
    }

    #[test]
    fn bce_hand_evaluated_pair() {
        let batch = [
            Prediction {
                score: 0.9,
                label: 1.0,
                item_id: 0,
            },
            Prediction {
                score: 0.1,
                label: 0.0,
                item_id: 1,
            },
        ];
        let expect = -0.5 * (0.9f64.ln() + 0.9f64.ln());
        assert!((bce_loss(&batch).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 0.1054).abs() < 1e-4);
    }

    #[test]
    fn bce_empty_batch_is_error() {
        assert!(matches!(bce_loss(&[]), Err(BackboneError::EmptyBatch)));
    }

    /// Central-difference oracle for the mean BCE as a function of (p, q's).
    fn fd_loss(p: &[f64], items: &[(Vec<f64>, f64, usize)]) -> f64 {
        let u = user(p.to_vec());
        let batch: Vec<Prediction> = items
            .iter()
            .map(|(q, label, item_id)| Prediction {
                score: score(&u, q).unwrap(),
                label: *label,
                item_id: *item_id,
            })
            .collect();
        bce_loss(&batch).unwrap()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let h = 1e-5;
        for case in 0..100 {
            let d = 8;
            let b = 16;
            let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let items: Vec<(Vec<f64>, f64, usize)> = (0..b)
                .map(|i| {
                    (
                        (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                        if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
                        i,
                    )
                })
                .collect();
            let u = user(p.clone());
            let refs: Vec<(&[f64], f64, usize)> = items
                .iter()
                .map(|(q, l, id)| (q.as_slice(), *l, *id))
                .collect();
            let grads = bce_gradients(&u, &refs).unwrap();
            let mut max_rel: f64 = 0.0;
            for j in 0..d {
                let mut pp = p.clone();
                pp[j] += h;
                let mut pm = p.clone();
                pm[j] -= h;
                let fd = (fd_loss(&pp, &items) - fd_loss(&pm, &items)) / (2.0 * h);
                let rel = (grads.d_user[j] - fd).abs() / fd.abs().max(1e-6);
                max_rel = max_rel.max(rel);
            }
            for (item_id, dq) in &grads.d_items {
                for j in 0..d {
                    let mut up = items.clone();
                    up[*item_id].0[j] += h;
                    let mut dn = items.clone();
                    dn[*item_id].0[j] -= h;
                    let fd = (fd_loss(&p, &up) - fd_loss(&p, &dn)) / (2.0 * h);
                    let rel = (dq[j] - fd).abs() / fd.abs().max(1e-6);
                    max_rel = max_rel.max(rel);
                }
            }
            assert!(max_rel < 1e-4, "case {case}: max rel err {max_rel}");
        }
    }

    #[test]
    fn gradients_zero_when_prediction_matches_label() {
        // label 0.5 is synthetic, but makes score == label reachable
        let p = user(vec![0.0; 4]);
        let q = vec![1.0, 2.0, 3.0, 4.0];
        let items: Vec<(&[f64], f64, usize)> = vec![(q.as_slice(), 0.5, 0)];
        let grads = bce_gradients(&p, &items).unwrap();
        assert!(grads.d_user.iter().all(|&g| g.abs() < 1e-15));
        assert!(grads.d_items[&0].iter().all(|&g| g.abs() < 1e-15));
    }

    #[test]
    fn gradients_invariant_under_batch_duplication() {
        let p = user(vec![0.3, -0.2, 0.5]);
        let q1 = vec![1.0, 0.0, -1.0];
        let q2 = vec![0.5, 0.5, 0.5];
        let single: Vec<(&[f64], f64, usize)> =
            vec![(q1.as_slice(), 1.0, 0), (q2.as_slice(), 0.0, 1)];
        let doubled: Vec<(&[f64], f64, usize)> = vec![
            (q1.as_slice(), 1.0, 0),
            (q2.as_slice(), 0.0, 1),
            (q1.as_slice(), 1.0, 0),
            (q2.as_slice(), 0.0, 1),
        ];
        let a = bce_gradients(&p, &single).unwrap();
        let b = bce_gradients(&p, &doubled).unwrap();
        for (x, y) in a.d_user.iter().zip(&b.d_user) {
            assert!((x - y).abs() < 1e-14);
        }
        for (id, dq) in &a.d_items {
            for (x, y) in dq.iter().zip(&b.d_items[id]) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sgd_step_decreases_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..20 {
            let d = 6;
            let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let items: Vec<(Vec<f64>, f64, usize)> = (0..8)
                .map(|i| {
                    (
                        (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                        if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
                        i,
                    )
                })
                .collect();
            let before = fd_loss(&p, &items);
            let u = user(p.clone());
            let refs: Vec<(&[f64], f64, usize)> = items
                .iter()
                .map(|(q, l, id)| (q.as_slice(), *l, *id))
                .collect();
            let grads = bce_gradients(&u, &refs).unwrap();
            let eta = 1e-3;
            let p2: Vec<f64> = p
                .iter()
                .zip(&grads.d_user)
                .map(|(x, g)| x - eta * g)
                .collect();
            let items2: Vec<(Vec<f64>, f64, usize)> = items
                .iter()
                .map(|(q, l, id)| {
                    let dq = &grads.d_items[id];
                    (
                        q.iter().zip(dq).map(|(x, g)| x - eta * g).collect(),
                        *l,
                        *id,
                    )
                })
                .collect();
            let after = fd_loss(&p2, &items2);
            assert!(after <= before, "loss went {before} -> {after}");
        }
    }
}
