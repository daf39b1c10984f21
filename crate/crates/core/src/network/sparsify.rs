use crate::embedding::{EmbeddingKind, EmbeddingMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_MIDDLE_FRACTION: f64 = 0.95;

/// Linear-interpolation quantile of sorted data (R's type 7).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Zero the middle `middle_fraction` of all matrix entries, pooled.
///
/// With `lo`/`hi` the `(1 - f)/2` and `(1 + f)/2` quantiles, entries with
/// `lo < v < hi` become zero and boundary ties are kept. When the band
/// collapses (`lo == hi`, e.g. a constant matrix) entries equal to the band
/// value are zeroed.
pub fn sparsify_embeddings(emb: &EmbeddingMatrix, middle_fraction: f64) -> Result<EmbeddingMatrix> {
    if !(middle_fraction > 0.0 && middle_fraction < 1.0) {
        return Err(Error::Input(format!(
            "middle_fraction must be in (0, 1), got {middle_fraction}"
        )));
    }
    let values = emb.values();
    if values.is_empty() {
        return Ok(emb.with_values(values.clone(), EmbeddingKind::Sparse));
    }
    let mut sorted: Vec<f64> = values.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - middle_fraction) / 2.0;
    let lo = quantile_sorted(&sorted, tail);
    let hi = quantile_sorted(&sorted, 1.0 - tail);
    let out = values.map(|v| {
        let zero = if lo == hi { v == lo } else { lo < v && v < hi };
        if zero {
            0.0
        } else {
            v
        }
    });
    Ok(emb.with_values(out, EmbeddingKind::Sparse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> EmbeddingMatrix {
        let ids = (0..cols).map(|c| c.to_string()).collect();
        EmbeddingMatrix::new(DMatrix::from_vec(rows, cols, data), ids, EmbeddingKind::Full).unwrap()
    }

    #[test]
    fn symmetric_sample_keeps_about_five_percent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let data: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let m = matrix(100, 10, data.clone());
        let s = sparsify_embeddings(&m, 0.95).unwrap();
        assert_eq!(s.kind(), EmbeddingKind::Sparse);

        // Independent oracle: rank-based count. With n = 1000, the 2.5% and
        // 97.5% type-7 quantiles fall at positions 24.975 and 974.025, so
        // exactly the sorted entries 25..=974 lie strictly inside.
        let mut sorted = data.clone();
        sorted.sort_by(f64::total_cmp);
        let inside: Vec<f64> = sorted[25..=974].to_vec();
        let zeros = s.values().iter().filter(|v| **v == 0.0).count();
        assert_eq!(zeros, inside.len());
        assert_eq!(zeros, 950);
        for (orig, new) in data.iter().zip(s.values().iter()) {
            if inside.contains(orig) {
                assert_eq!(*new, 0.0);
            } else {
                assert_eq!(new, orig);
            }
        }
    }

    #[test]
    fn vanishing_middle_band_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..40).map(|_| StandardNormal.sample(&mut rng)).collect();
        let m = matrix(10, 4, data);
        let s = sparsify_embeddings(&m, 1e-9).unwrap();
        assert_eq!(s.values(), m.values());
    }

    #[test]
    fn constant_matrix_becomes_zero() {
        let m = matrix(3, 3, vec![0.7; 9]);
        let s = sparsify_embeddings(&m, 0.95).unwrap();
        assert!(s.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_out_of_range_fraction() {
        let m = matrix(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        assert!(sparsify_embeddings(&m, 0.0).is_err());
        assert!(sparsify_embeddings(&m, 1.0).is_err());
    }
}
