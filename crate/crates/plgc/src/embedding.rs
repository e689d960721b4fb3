//! Embedding-table storage, initialization, and spectral diagnostics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("information abundance undefined: table is all zero")]
    ZeroTable,
    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Dense row-major M x d matrix of item vectors. The global table G, each
/// client's local table C and the personalized table Q all share this shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingTable {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingTable {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        assert!(rows >= 1 && dim >= 1, "table must be at least 1x1");
        EmbeddingTable {
            rows,
            dim,
            values: vec![0.0; rows * dim],
        }
    }

    pub fn from_values(rows: usize, dim: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * dim);
        EmbeddingTable { rows, dim, values }
    }

    /// Entries i.i.d. N(0, scale^2), deterministic under `seed`.
    pub fn random(rows: usize, dim: usize, scale: f64, seed: u64) -> Self {
        assert!(scale > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, scale).expect("valid std dev");
        let values = (0..rows * dim).map(|_| normal.sample(&mut rng)).collect();
        EmbeddingTable { rows, dim, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.values[m * self.dim..(m + 1) * self.dim]
    }

    pub fn row_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.values[m * self.dim..(m + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_shape(&self, other: &EmbeddingTable) -> bool {
        self.rows == other.rows && self.dim == other.dim
    }

    /// Squared Frobenius norm, i.e. the trace of the full Gram matrix E E^T
    /// computed column-wise without materializing it.
    pub fn gram_trace(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Singular values in descending order, length min(M, d).
    ///
    /// Computed from the symmetric eigenvalues of E^T E (d x d); round-off
    /// negatives are clamped to zero before the square root.
    pub fn singular_values(&self) -> Vec<f64> {
        let d = self.dim;
        let mut gram = vec![0.0; d * d];
        for row in self.values.chunks(d) {
            for i in 0..d {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..d {
                    gram[i * d + j] += ri * row[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                gram[i * d + j] = gram[j * d + i];
            }
        }
        let mut eig = jacobi_eigenvalues(&mut gram, d);
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eig.truncate(self.rows.min(d));
        eig.iter().map(|&e| e.max(0.0).sqrt()).collect()
    }

    /// Sum of singular values divided by the largest (Information Abundance).
    pub fn information_abundance(&self) -> Result<f64, EmbeddingError> {
        let sv = self.singular_values();
        let max = sv[0];
        if max <= 0.0 {
            return Err(EmbeddingError::ZeroTable);
        }
        Ok(sv.iter().sum::<f64>() / max)
    }

    pub fn spectrum(&self) -> Result<SpectrumReport, EmbeddingError> {
        let singular_values = self.singular_values();
        if singular_values[0] <= 0.0 {
            return Err(EmbeddingError::ZeroTable);
        }
        let max = singular_values[0];
        let information_abundance = singular_values.iter().sum::<f64>() / max;
        Ok(SpectrumReport {
            singular_values,
            information_abundance,
        })
    }

    /// One row per item, `d` tab-separated columns.
    pub fn write_tsv(&self, path: &Path) -> Result<(), EmbeddingError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for row in self.values.chunks(self.dim) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            writeln!(out, "{}", line.join("\t"))?;
        }
        Ok(())
    }
}

/// One user's private d-dimensional embedding. Never serialized in any
/// server-bound message.
#[derive(Debug, Clone, PartialEq)]
pub struct UserVector {
    values: Vec<f64>,
}

impl UserVector {
    pub fn zeros(dim: usize) -> Self {
        UserVector {
            values: vec![0.0; dim],
        }
    }

    pub fn random(dim: usize, scale: f64, seed: u64) -> Self {
        assert!(scale > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, scale).expect("valid std dev");
        UserVector {
            values: (0..dim).map(|_| normal.sample(&mut rng)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Descending, nonnegative, length min(M, d).
    pub singular_values: Vec<f64>,
    pub information_abundance: f64,
}

impl SpectrumReport {
    /// CSV rows `dim_index, singular_value, log10_singular_value`.
    pub fn write_csv(&self, path: &Path) -> Result<(), EmbeddingError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "dim_index,singular_value,log10_singular_value")?;
        for (i, sv) in self.singular_values.iter().enumerate() {
            writeln!(out, "{},{:.12e},{:.12e}", i, sv, sv.log10())?;
        }
        Ok(())
    }
}

/// JSON sidecar accompanying an embedding TSV export.
#[derive(Debug, Clone, Serialize)]
pub struct TableSidecar {
    pub rows: usize,
    pub dim: usize,
    pub role: String,
    pub round: usize,
}

pub fn export_table(
    table: &EmbeddingTable,
    role: &str,
    round: usize,
    tsv_path: &Path,
) -> Result<(), EmbeddingError> {
    table.write_tsv(tsv_path)?;
    let sidecar = TableSidecar {
        rows: table.rows(),
        dim: table.dim(),
        role: role.to_string(),
        round,
    };
    let json_path = tsv_path.with_extension("json");
    std::fs::write(json_path, serde_json::to_string_pretty(&sidecar).unwrap())?;
    Ok(())
}

/// Eigenvalues of a symmetric n x n matrix by cyclic Jacobi rotations.
/// The matrix is destroyed in place.
fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a[0]];
    }
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-14 * scale.max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol / (n as f64) {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outer_product(u: &[f64], v: &[f64]) -> EmbeddingTable {
        let mut values = Vec::with_capacity(u.len() * v.len());
        for &ui in u {
            for &vj in v {
                values.push(ui * vj);
            }
        }
        EmbeddingTable::from_values(u.len(), v.len(), values)
    }

    #[test]
    fn random_table_deterministic_under_seed() {
        let a = EmbeddingTable::random(4, 2, 0.01, 7);
        let b = EmbeddingTable::random(4, 2, 0.01, 7);
        assert_eq!(a, b);
        assert_ne!(a, EmbeddingTable::random(4, 2, 0.01, 8));
    }

    #[test]
    fn random_table_sample_std_near_scale() {
        let t = EmbeddingTable::random(200, 8, 0.01, 1);
        let n = t.values().len() as f64;
        let mean = t.values().iter().sum::<f64>() / n;
        let var = t.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        assert!(std > 0.005 && std < 0.02, "sample std {std}");
    }

    #[test]
    fn single_entry_table_finite() {
        let t = EmbeddingTable::random(1, 1, 0.01, 3);
        assert!(t.values()[0].is_finite());
    }

    #[test]
    fn ia_rank_one_is_exactly_one() {
        let t = outer_product(&[1.0, -2.0, 0.5, 3.0], &[0.3, 1.2]);
        let ia = t.information_abundance().unwrap();
        assert!((ia - 1.0).abs() < 1e-9, "ia = {ia}");
    }

    #[test]
    fn ia_identity_equals_dim() {
        for d in [2usize, 5, 8] {
            let mut t = EmbeddingTable::zeros(d, d);
            for i in 0..d {
                t.row_mut(i)[i] = 1.0;
            }
            let ia = t.information_abundance().unwrap();
            assert!((ia - d as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn ia_zero_table_is_error() {
        let t = EmbeddingTable::zeros(3, 3);
        assert!(matches!(
            t.information_abundance(),
            Err(EmbeddingError::ZeroTable)
        ));
    }

    #[test]
    fn ia_matches_nalgebra_svd_oracle() {
        for seed in 0..10u64 {
            let t = EmbeddingTable::random(20, 8, 1.0, seed);
            let m = nalgebra::DMatrix::from_row_slice(20, 8, t.values());
            let sv = m.singular_values();
            let oracle = sv.iter().sum::<f64>() / sv.iter().cloned().fold(0.0, f64::max);
            let ia = t.information_abundance().unwrap();
            assert!((ia - oracle).abs() < 1e-9, "ia {ia} vs oracle {oracle}");
        }
    }

    #[test]
    fn spectrum_diagonal_case() {
        let mut t = EmbeddingTable::zeros(5, 3);
        t.row_mut(0)[0] = 3.0;
        t.row_mut(1)[1] = 2.0;
        t.row_mut(2)[2] = 1.0;
        let sv = t.singular_values();
        assert_eq!(sv.len(), 3);
        for (got, want) in sv.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_orthogonal_columns_equals_column_norms() {
        // columns along distinct axes of R^6, scaled by chosen norms
        let norms = [4.0, 2.5, 0.5];
        let mut t = EmbeddingTable::zeros(6, 3);
        for (j, &nj) in norms.iter().enumerate() {
            t.row_mut(2 * j)[j] = nj / 2.0_f64.sqrt();
            t.row_mut(2 * j + 1)[j] = nj / 2.0_f64.sqrt();
        }
        let sv = t.singular_values();
        for (got, want) in sv.iter().zip(norms) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn spectrum_invariant_under_transpose() {
        let t = EmbeddingTable::random(12, 5, 1.0, 42);
        let mut tt = EmbeddingTable::zeros(5, 12);
        for i in 0..12 {
            for j in 0..5 {
                tt.row_mut(j)[i] = t.row(i)[j];
            }
        }
        let a = t.singular_values();
        let b = tt.singular_values();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn ia_scale_invariance() {
        for seed in 0..20u64 {
            let t = EmbeddingTable::random(15, 6, 0.3, seed);
            let scaled = EmbeddingTable::from_values(
                15,
                6,
                t.values().iter().map(|v| v * -3.7).collect(),
            );
            let a = t.information_abundance().unwrap();
            let b = scaled.information_abundance().unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_squared_sum_matches_frobenius() {
        for seed in 0..10u64 {
            let t = EmbeddingTable::random(30, 7, 0.5, seed);
            let sv = t.singular_values();
            let sq: f64 = sv.iter().map(|s| s * s).sum();
            let frob = t.gram_trace();
            assert!((sq - frob).abs() / frob < 1e-8);
            assert!(sv.windows(2).all(|w| w[0] >= w[1]));
            assert!(sv.iter().all(|&s| s >= 0.0));
        }
    }
}
