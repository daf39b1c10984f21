//! Embedding matrices: rows are embedding dimensions, columns are items.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Full,
    Sparse,
}

impl EmbeddingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingKind::Full => "full",
            EmbeddingKind::Sparse => "sparse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    values: DMatrix<f64>,
    item_ids: Vec<String>,
    kind: EmbeddingKind,
}

impl EmbeddingMatrix {
    pub fn new(values: DMatrix<f64>, item_ids: Vec<String>, kind: EmbeddingKind) -> Result<Self> {
        if values.ncols() != item_ids.len() {
            return Err(Error::Input(format!(
                "embedding matrix has {} columns but {} item ids",
                values.ncols(),
                item_ids.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let col = pos / values.nrows().max(1);
            return Err(Error::Input(format!(
                "embedding for item `{}` contains a non-finite value",
                item_ids[col]
            )));
        }
        Ok(Self {
            values,
            item_ids,
            kind,
        })
    }

    /// Build from one vector per item; all vectors must share a dimension.
    pub fn from_columns(item_ids: Vec<String>, columns: &[Vec<f64>]) -> Result<Self> {
        let dims = columns.first().map_or(0, Vec::len);
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != dims) {
            return Err(Error::Input(format!(
                "embedding dimension mismatch: item {} has {} dimensions, expected {dims}",
                i,
                c.len()
            )));
        }
        let values = DMatrix::from_fn(dims, columns.len(), |r, c| columns[c][r]);
        Self::new(values, item_ids, EmbeddingKind::Full)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn dims(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_items(&self) -> usize {
        self.values.ncols()
    }

    pub(crate) fn with_values(&self, values: DMatrix<f64>, kind: EmbeddingKind) -> Self {
        debug_assert_eq!(values.shape(), self.values.shape());
        Self {
            values,
            item_ids: self.item_ids.clone(),
            kind,
        }
    }

    /// Columns for `ids`, in the order given.
    pub fn select(&self, ids: &[String]) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .item_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let missing: Vec<&str> = ids
            .iter()
            .filter(|id| !index.contains_key(id.as_str()))
            .map(String::as_str)
            .collect();
        if !missing.is_empty() {
            return Err(Error::Input(format!(
                "embedding matrix has no column for item(s): {}",
                missing.join(", ")
            )));
        }
        let cols: Vec<usize> = ids.iter().map(|id| index[id.as_str()]).collect();
        let values = self.values.select_columns(cols.iter());
        Ok(Self {
            values,
            item_ids: ids.to_vec(),
            kind: self.kind,
        })
    }

    /// Concatenate matrices column-wise. All parts must share dimension and kind.
    pub fn concat(parts: &[&EmbeddingMatrix]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::Input("no embedding matrices to concatenate".into()));
        };
        let dims = first.dims();
        if parts.iter().any(|p| p.dims() != dims) {
            return Err(Error::Input("cannot concatenate embeddings of different dimension".into()));
        }
        let n: usize = parts.iter().map(|p| p.n_items()).sum();
        let mut values = DMatrix::zeros(dims, n);
        let mut ids = Vec::with_capacity(n);
        let mut at = 0;
        for p in parts {
            values.columns_mut(at, p.n_items()).copy_from(&p.values);
            at += p.n_items();
            ids.extend(p.item_ids.iter().cloned());
        }
        Self::new(values, ids, first.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, 0.0, 1.0]);
        let err = EmbeddingMatrix::new(m, vec!["a".into(), "b".into()], EmbeddingKind::Full);
        assert!(err.unwrap_err().to_string().contains("`b`"));
    }

    #[test]
    fn select_reorders_columns() {
        let e = EmbeddingMatrix::from_columns(
            vec!["a".into(), "b".into(), "c".into()],
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
        )
        .unwrap();
        let s = e.select(&["c".into(), "a".into()]).unwrap();
        assert_eq!(s.values()[(1, 0)], 6.0);
        assert_eq!(s.values()[(0, 1)], 1.0);
        assert!(e.select(&["z".into()]).is_err());
    }
}
