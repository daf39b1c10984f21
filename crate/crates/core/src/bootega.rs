//! Parametric bootstrap of EGA and stability-based item pruning.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::ega::{ega, EgaOptions};
use crate::embedding::{EmbeddingKind, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::item::ItemPool;
use crate::network::{ensure_positive_definite, item_correlations, NetworkMethod, PD_EPS};
use crate::partition::Partition;
use crate::seed::{replicate_seed, stage_seed};
use crate::uva::MIN_STAGE_ITEMS;

pub const DEFAULT_REPLICATES: usize = 100;
pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootOptions {
    pub n_replicates: usize,
    pub threshold: f64,
    pub seed: u64,
    /// Remove only the least stable item per iteration.
    pub prune_one: bool,
}

impl Default for BootOptions {
    fn default() -> Self {
        Self {
            n_replicates: DEFAULT_REPLICATES,
            threshold: DEFAULT_STABILITY_THRESHOLD,
            seed: 0,
            prune_one: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootResult {
    pub n_replicates: usize,
    pub replicate_seed_base: u64,
    pub model: NetworkMethod,
    pub embedding: EmbeddingKind,
    /// Share of replicates per detected community count.
    pub dimension_frequency: BTreeMap<usize, f64>,
    pub item_stability: IndexMap<String, f64>,
    /// Communities of the EGA on the original embedding.
    pub empirical: Partition,
}

impl BootResult {
    pub fn min_stability(&self) -> Option<f64> {
        self.item_stability.values().copied().min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRemoval {
    pub iteration: usize,
    pub item: String,
    pub stability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootReport {
    pub initial_boot: Option<BootResult>,
    pub final_boot: Option<BootResult>,
    pub n_removed: usize,
    pub items_removed: Vec<StabilityRemoval>,
    pub initial_boot_with_redundancies: Option<BootResult>,
    pub iterations: usize,
    pub threshold: f64,
    /// Pruning stopped because it would leave fewer than four items.
    pub truncated: bool,
    /// The stage did not run (pool below the pipeline minimum).
    pub skipped: bool,
}

impl BootReport {
    pub fn skipped(threshold: f64) -> Self {
        Self {
            initial_boot: None,
            final_boot: None,
            n_removed: 0,
            items_removed: Vec::new(),
            initial_boot_with_redundancies: None,
            iterations: 0,
            threshold,
            truncated: false,
            skipped: true,
        }
    }
}

/// Lower-triangular factor `L` with `L Lᵀ = R`, falling back to a clipped
/// eigendecomposition square root when Cholesky fails numerically.
fn sampling_factor(r: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = r.clone().cholesky() {
        return ch.l();
    }
    let eig = r.clone().symmetric_eigen();
    let sqrt = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt)
}

struct ReplicateSampler {
    factor_t: DMatrix<f64>,
    dims: usize,
    item_ids: Vec<String>,
    seed: u64,
}

impl ReplicateSampler {
    fn new(emb: &EmbeddingMatrix, seed: u64) -> Result<Self> {
        let r = ensure_positive_definite(&item_correlations(emb)?, PD_EPS);
        Ok(Self {
            factor_t: sampling_factor(r.values()).transpose(),
            dims: emb.dims(),
            item_ids: emb.item_ids().to_vec(),
            seed,
        })
    }

    fn draw(&self, k: usize) -> EmbeddingMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(self.seed, k));
        let p = self.item_ids.len();
        // Row-major fill so each replicate row is one MVN draw.
        let mut z = DMatrix::<f64>::zeros(self.dims, p);
        for i in 0..self.dims {
            for j in 0..p {
                z[(i, j)] = StandardNormal.sample(&mut rng);
            }
        }
        let x = z * &self.factor_t;
        EmbeddingMatrix::new(x, self.item_ids.clone(), EmbeddingKind::Full)
            .expect("finite draws with matching columns")
    }
}

/// `n` replicate matrices drawn from `MVN(0, R)`, `R` the PD-repaired item
/// correlation of `emb`, each `dims × items`. Replicate `k` is seeded with
/// [`replicate_seed`]`(seed, k)` and can be regenerated on its own.
pub fn parametric_replicates(emb: &EmbeddingMatrix, n: usize, seed: u64) -> Result<Vec<EmbeddingMatrix>> {
    let sampler = ReplicateSampler::new(emb, seed)?;
    Ok((0..n).map(|k| sampler.draw(k)).collect())
}

/// Replicate `k` alone; identical to `parametric_replicates(emb, n, seed)[k]`.
pub fn parametric_replicate(emb: &EmbeddingMatrix, k: usize, seed: u64) -> Result<EmbeddingMatrix> {
    Ok(ReplicateSampler::new(emb, seed)?.draw(k))
}

/// Replicate labels mapped onto empirical labels by a maximum-overlap
/// assignment. Replicate communities left unmatched get labels that no
/// empirical community uses.
pub fn align_partition(empirical: &Partition, replicate: &Partition) -> Result<Vec<u32>> {
    let emp = empirical.labels();
    let rep = replicate.labels_for(empirical.item_ids())?;
    let emp_labels: Vec<u32> = sorted_unique(emp);
    let rep_labels: Vec<u32> = sorted_unique(&rep);
    let size = emp_labels.len().max(rep_labels.len());
    let mut overlap = Matrix::new(size, size, 0i64);
    for (&e, &r) in emp.iter().zip(&rep) {
        let ri = rep_labels.binary_search(&r).expect("label present");
        let ei = emp_labels.binary_search(&e).expect("label present");
        overlap[(ri, ei)] += 1;
    }
    let (_, assignment) = kuhn_munkres(&overlap);
    let fresh_base = emp_labels.last().copied().unwrap_or(0);
    let mapping: Vec<u32> = (0..rep_labels.len())
        .map(|ri| {
            let ei = assignment[ri];
            if ei < emp_labels.len() {
                emp_labels[ei]
            } else {
                fresh_base + 1 + ri as u32
            }
        })
        .collect();
    Ok(rep
        .iter()
        .map(|r| mapping[rep_labels.binary_search(r).expect("label present")])
        .collect())
}

fn sorted_unique(labels: &[u32]) -> Vec<u32> {
    let mut v = labels.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Share of replicates in which each item keeps its empirical community
/// after alignment, keyed in empirical item order.
pub fn item_stability(empirical: &Partition, replicates: &[Partition]) -> Result<IndexMap<String, f64>> {
    let mut hits = vec![0usize; empirical.len()];
    for rep in replicates {
        let aligned = align_partition(empirical, rep)?;
        for (h, (a, e)) in hits.iter_mut().zip(aligned.iter().zip(empirical.labels())) {
            if a == e {
                *h += 1;
            }
        }
    }
    let n = replicates.len().max(1) as f64;
    Ok(empirical
        .item_ids()
        .iter()
        .cloned()
        .zip(hits.into_iter().map(|h| h as f64 / n))
        .collect())
}

/// Bootstrap EGA on `emb`: empirical communities, replicate communities,
/// dimension frequencies and item stabilities.
pub fn boot_ega(
    emb: &EmbeddingMatrix,
    method: NetworkMethod,
    n: usize,
    seed: u64,
    opts: &EgaOptions,
) -> Result<BootResult> {
    let empirical = ega(emb, method, opts)?.communities;
    let sampler = ReplicateSampler::new(emb, seed)?;
    let partitions: Vec<Partition> = (0..n)
        .into_par_iter()
        .map(|k| ega(&sampler.draw(k), method, opts).map(|r| r.communities))
        .collect::<Result<_>>()?;

    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for p in &partitions {
        *counts.entry(p.n_communities()).or_default() += 1;
    }
    let dimension_frequency = counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / n.max(1) as f64))
        .collect();
    Ok(BootResult {
        n_replicates: n,
        replicate_seed_base: seed,
        model: method,
        embedding: emb.kind(),
        dimension_frequency,
        item_stability: item_stability(&empirical, &partitions)?,
        empirical,
    })
}

/// Repeatedly bootstrap and drop items whose stability is below the
/// threshold until every remaining item is stable.
///
/// All unstable items go at once unless `prune_one` is set; when every item
/// is unstable only the least stable one is removed. Iteration `i` draws its
/// replicates from `stage_seed(seed, "bootega", i)`.
pub fn stability_reduce(
    pool: &ItemPool,
    emb: &EmbeddingMatrix,
    method: NetworkMethod,
    boot: &BootOptions,
    opts: &EgaOptions,
) -> Result<(ItemPool, BootReport)> {
    if pool.len() < MIN_STAGE_ITEMS {
        return Err(Error::Size(format!(
            "bootstrap stability needs at least {MIN_STAGE_ITEMS} items, got {}",
            pool.len()
        )));
    }
    let mut current = pool.clone();
    let mut report = BootReport {
        threshold: boot.threshold,
        skipped: false,
        ..BootReport::skipped(boot.threshold)
    };

    loop {
        let iteration = report.iterations + 1;
        report.iterations = iteration;
        let sub = emb.select(&current.ids())?;
        let result = boot_ega(
            &sub,
            method,
            boot.n_replicates,
            stage_seed(boot.seed, "bootega", iteration as u64),
            opts,
        )?;

        let mut unstable: Vec<(&String, f64)> = result
            .item_stability
            .iter()
            .filter(|(_, s)| **s < boot.threshold)
            .map(|(id, s)| (id, *s))
            .collect();
        unstable.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        if boot.prune_one || unstable.len() == current.len() {
            unstable.truncate(1);
        }

        let stop = if unstable.is_empty() {
            true
        } else if current.len() - unstable.len() < MIN_STAGE_ITEMS {
            report.truncated = true;
            true
        } else {
            false
        };
        if stop {
            if report.initial_boot.is_none() {
                report.initial_boot = Some(result.clone());
            }
            report.final_boot = Some(result);
            break;
        }

        let dropped: HashSet<&str> = unstable.iter().map(|(id, _)| id.as_str()).collect();
        for (id, s) in &unstable {
            report.items_removed.push(StabilityRemoval {
                iteration,
                item: (*id).clone(),
                stability: *s,
            });
        }
        report.n_removed += dropped.len();
        let ids = current.ids();
        let keep: HashSet<&str> = ids
            .iter()
            .map(String::as_str)
            .filter(|id| !dropped.contains(id))
            .collect();
        current = current.retain_ids(&keep);
        if report.initial_boot.is_none() {
            report.initial_boot = Some(result);
        }
    }
    Ok((current, report))
}

/// Stability table: `item,statement,stability,empirical_community`.
pub fn write_stability_csv<W: Write>(result: &BootResult, pool: &ItemPool, writer: W) -> Result<()> {
    let statements: std::collections::HashMap<&str, &str> = pool
        .items
        .iter()
        .map(|i| (i.id.as_str(), i.statement.as_str()))
        .collect();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["item", "statement", "stability", "empirical_community"])?;
    for (id, s) in &result.item_stability {
        w.write_record([
            id.clone(),
            statements.get(id.as_str()).copied().unwrap_or("").to_string(),
            s.to_string(),
            result.empirical.get(id).map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
