use nalgebra::{DMatrix, SymmetricEigen};

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Symmetric item-by-item correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    values: DMatrix<f64>,
    item_ids: Vec<String>,
}

impl CorrelationMatrix {
    /// Wrap a matrix, enforcing exact symmetry (upper triangle wins), unit
    /// diagonal and entries clipped to [-1, 1].
    pub fn new(mut values: DMatrix<f64>, item_ids: Vec<String>) -> Result<Self> {
        let p = values.nrows();
        if values.ncols() != p || item_ids.len() != p {
            return Err(Error::Input(format!(
                "correlation matrix must be square with one id per row ({}x{}, {} ids)",
                values.nrows(),
                values.ncols(),
                item_ids.len()
            )));
        }
        for i in 0..p {
            values[(i, i)] = 1.0;
            for j in (i + 1)..p {
                let v = values[(i, j)].clamp(-1.0, 1.0);
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        Ok(Self { values, item_ids })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.values.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pearson correlations between item columns, computed over embedding dimensions.
pub fn item_correlations(emb: &EmbeddingMatrix) -> Result<CorrelationMatrix> {
    let x = emb.values();
    let (n, p) = x.shape();
    if n < 2 || p < 2 {
        return Err(Error::Size(format!(
            "need at least 2 dimensions and 2 items to correlate, got {n}x{p}"
        )));
    }
    let mut z = x.clone();
    for (c, mut col) in z.column_iter_mut().enumerate() {
        let mean = col.sum() / n as f64;
        col.add_scalar_mut(-mean);
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVariance {
                item: emb.item_ids()[c].clone(),
            });
        }
        col /= norm;
    }
    let r = z.tr_mul(&z);
    CorrelationMatrix::new(r, emb.item_ids().to_vec())
}

/// Ridge-repair `c` so that its smallest eigenvalue is at least `eps`.
///
/// A correlation matrix that already satisfies the bound is returned
/// unchanged. Otherwise `r` is added to the diagonal and the result is
/// rescaled to unit diagonal, `(C + rI) / (1 + r)`, with
/// `r = (eps - lambda_min) / (1 - eps)` so the repaired minimum eigenvalue
/// is exactly `eps`.
pub fn ensure_positive_definite(c: &CorrelationMatrix, eps: f64) -> CorrelationMatrix {
    let lambda_min = c.min_eigenvalue();
    if lambda_min >= eps {
        return c.clone();
    }
    let ridge = (eps - lambda_min) / (1.0 - eps);
    let mut v = c.values.clone();
    for i in 0..v.nrows() {
        v[(i, i)] += ridge;
    }
    v /= 1.0 + ridge;
    CorrelationMatrix::new(v, c.item_ids.clone()).expect("shape preserved")
}
