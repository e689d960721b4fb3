//! Ranking metrics under the sampled-candidates protocol, plus
//! embedding-degradation reporting.

use crate::backbone::{dot, sigmoid};
use crate::embedding::{EmbeddingTable, UserVector};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("candidate item {0} outside item range 0..{1}")]
    CandidateOutOfRange(usize, usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-user rank of the held-out item among the candidate set, with the
/// aggregate metrics derived from it.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub hr: f64,
    pub ndcg: f64,
    /// user -> 1-based rank of the held-out item
    pub per_user_ranks: Vec<usize>,
}

/// Rank candidates by descending score, ties broken by ascending item id.
/// Returns the candidate ids in rank order.
pub fn rank_candidates(
    user: &UserVector,
    table: &EmbeddingTable,
    candidates: &[usize],
) -> Result<Vec<usize>, EvalError> {
    for &c in candidates {
        if c >= table.rows() {
            return Err(EvalError::CandidateOutOfRange(c, table.rows()));
        }
    }
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .map(|&c| (c, sigmoid(dot(user.values(), table.row(c)))))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(scored.into_iter().map(|(c, _)| c).collect())
}

/// 1-based rank of `target` among the candidates.
pub fn rank_of(
    user: &UserVector,
    table: &EmbeddingTable,
    target: usize,
    candidates: &[usize],
) -> Result<usize, EvalError> {
    let ranked = rank_candidates(user, table, candidates)?;
    Ok(ranked.iter().position(|&c| c == target).expect("target in candidates") + 1)
}

/// Fraction of users whose held-out item landed in the top K.
pub fn hit_ratio_at_k(ranks: &[usize], k: usize) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    ranks.iter().filter(|&&r| r <= k).count() as f64 / ranks.len() as f64
}

/// Mean of 1/log2(rank+1) for ranks within K; the single-relevant-item
/// closed form (ideal DCG = 1).
pub fn ndcg_at_k(ranks: &[usize], k: usize) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    let sum: f64 = ranks
        .iter()
        .map(|&r| {
            if r <= k {
                1.0 / ((r as f64) + 1.0).log2()
            } else {
                0.0
            }
        })
        .sum();
    sum / ranks.len() as f64
}

pub fn eval_result(ranks: Vec<usize>, k: usize) -> EvalResult {
    EvalResult {
        hr: hit_ratio_at_k(&ranks, k),
        ndcg: ndcg_at_k(&ranks, k),
        per_user_ranks: ranks,
    }
}

/// One row of the per-user information-abundance report.
#[derive(Debug, Clone)]
pub struct IaRow {
    pub user_id: usize,
    pub interaction_count: usize,
    pub log10_interactions: f64,
    pub ia_local: f64,
    pub ia_personalized: f64,
}

#[derive(Debug, Clone)]
pub struct IaReport {
    pub ia_global: f64,
    /// sorted ascending by interaction count
    pub rows: Vec<IaRow>,
}

impl IaReport {
    pub fn write_csv(&self, path: &Path) -> Result<(), EvalError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            out,
            "user_id,interaction_count,log10_interactions,ia_local,ia_personalized,ia_global"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.6},{:.9},{:.9},{:.9}",
                r.user_id,
                r.interaction_count,
                r.log10_interactions,
                r.ia_local,
                r.ia_personalized,
                self.ia_global
            )?;
        }
        Ok(())
    }
}

/// Spearman rank correlation between two paired samples.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |vals: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let mut ranks = vec![0.0; vals.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && vals[idx[j + 1]] == vals[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
