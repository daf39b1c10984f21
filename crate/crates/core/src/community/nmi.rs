use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::partition::Partition;

/// Normalized mutual information as a percentage in `[0, 100]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NmiScore(f64);

impl NmiScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for NmiScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}%", self.0)
    }
}

impl Serialize for NmiScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

/// Danon et al. (sum-normalized) NMI between two partitions of the same
/// items, natural logarithms, scaled to a percentage.
///
/// When either partition is a single community the entropy denominator
/// vanishes: the score is 100 if both are single-community, 0 otherwise.
pub fn nmi(a: &Partition, b: &Partition) -> Result<NmiScore> {
    let la = a.labels();
    let lb = b.labels_for(a.item_ids())?;
    let n = la.len();
    if n == 0 {
        return Ok(NmiScore(100.0));
    }

    let mut joint: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut rows: BTreeMap<u32, usize> = BTreeMap::new();
    let mut cols: BTreeMap<u32, usize> = BTreeMap::new();
    for (&x, &y) in la.iter().zip(&lb) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }

    match (rows.len() == 1, cols.len() == 1) {
        (true, true) => return Ok(NmiScore(100.0)),
        (true, false) | (false, true) => return Ok(NmiScore(0.0)),
        _ => {}
    }
    // One-to-one label correspondence: identical up to relabeling.
    if joint.len() == rows.len() && joint.len() == cols.len() {
        return Ok(NmiScore(100.0));
    }

    let nf = n as f64;
    let numerator: f64 = -2.0
        * joint
            .iter()
            .map(|(&(x, y), &nij)| {
                let nij = nij as f64;
                nij * (nij * nf / (rows[&x] as f64 * cols[&y] as f64)).ln()
            })
            .sum::<f64>();
    let entropy = |m: &BTreeMap<u32, usize>| -> f64 {
        m.values()
            .map(|&c| {
                let c = c as f64;
                c * (c / nf).ln()
            })
            .sum()
    };
    let denominator = entropy(&rows) + entropy(&cols);
    Ok(NmiScore((100.0 * numerator / denominator).clamp(0.0, 100.0)))
}
