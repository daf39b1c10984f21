//! Unique variable analysis: iterative removal of redundant items by
//! weighted topological overlap.

use std::collections::HashSet;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::ega::EgaOptions;
use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::item::ItemPool;
use crate::network::{estimate_network, item_correlations, Network, NetworkMethod};

pub const DEFAULT_WTO_CUTOFF: f64 = 0.25;
/// Smallest pool a reduction stage may leave behind.
pub const MIN_STAGE_ITEMS: usize = 4;

/// Weighted topological overlap of every item pair, with a zero diagonal.
///
/// Weights enter as magnitudes clipped to `[0, 1]`.
pub fn wto_matrix(net: &Network) -> DMatrix<f64> {
    let a = net.weights().map(|w| w.abs().min(1.0));
    let p = a.nrows();
    let shared = &a * &a;
    let k: Vec<f64> = (0..p).map(|i| a.row(i).sum()).collect();
    DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            0.0
        } else {
            (shared[(i, j)] + a[(i, j)]) / (k[i].min(k[j]) + 1.0 - a[(i, j)])
        }
    })
}

/// One redundancy cluster resolved in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedundancyDecision {
    pub sweep: usize,
    pub cluster_id: usize,
    pub items: Vec<String>,
    pub kept: String,
    pub removed: Vec<String>,
    /// Largest pairwise wTO inside the cluster.
    pub wto_max: f64,
    /// Mean wTO of the kept item to the rest of the pool.
    pub kept_mean_wto: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UvaSweep {
    pub sweep: usize,
    pub n_items: usize,
    /// Selected glasso penalty, when the sweep used glasso.
    pub lambda: Option<f64>,
    pub n_clusters: usize,
    pub n_removed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UvaReport {
    /// Network method used for wTO; `None` when the stage was skipped.
    pub model: Option<NetworkMethod>,
    pub n_removed: usize,
    pub n_sweeps: usize,
    pub redundant_pairs: Vec<RedundancyDecision>,
    pub sweeps: Vec<UvaSweep>,
    pub cutoff: f64,
    /// A sweep was abandoned because it would leave fewer than four items.
    pub truncated: bool,
    /// The stage did not run (pool below the pipeline minimum).
    pub skipped: bool,
}

impl UvaReport {
    pub fn skipped(cutoff: f64) -> Self {
        Self {
            model: None,
            n_removed: 0,
            n_sweeps: 0,
            redundant_pairs: Vec::new(),
            sweeps: Vec::new(),
            cutoff,
            truncated: false,
            skipped: true,
        }
    }
}

/// A cluster found on one wTO matrix: member indices, kept index, max wTO,
/// and the kept item's mean wTO.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPlan {
    pub members: Vec<usize>,
    pub kept: usize,
    pub wto_max: f64,
    pub kept_mean_wto: f64,
}

/// Redundancy clusters of a wTO matrix and the representative kept in each.
///
/// Clusters are the connected components (of size ≥ 2) of the graph with
/// an edge wherever `ω ≥ cutoff`, ordered by their smallest member. The kept
/// item has the lowest mean wTO to all other items; ties go to the smallest id.
pub fn plan_sweep(wto: &DMatrix<f64>, ids: &[String], cutoff: f64) -> Vec<ClusterPlan> {
    let p = wto.nrows();
    let mut parent: Vec<usize> = (0..p).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..p {
        for j in (i + 1)..p {
            if wto[(i, j)] >= cutoff {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; p];
    for i in 0..p {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }

    let mean_wto = |i: usize| -> f64 {
        if p < 2 {
            0.0
        } else {
            wto.row(i).sum() / (p - 1) as f64
        }
    };
    groups
        .into_iter()
        .filter(|g| g.len() >= 2)
        .map(|members| {
            let kept = *members
                .iter()
                .min_by(|&&x, &&y| {
                    mean_wto(x)
                        .total_cmp(&mean_wto(y))
                        .then_with(|| ids[x].cmp(&ids[y]))
                })
                .expect("cluster is non-empty");
            let mut wto_max = f64::NEG_INFINITY;
            for (n, &i) in members.iter().enumerate() {
                for &j in &members[n + 1..] {
                    wto_max = wto_max.max(wto[(i, j)]);
                }
            }
            ClusterPlan {
                kept_mean_wto: mean_wto(kept),
                members,
                kept,
                wto_max,
            }
        })
        .collect()
}

/// Remove redundant items sweep by sweep until no wTO reaches `cutoff`.
///
/// Each sweep re-estimates the network on the surviving columns of `emb`.
pub fn uva_reduce(
    pool: &ItemPool,
    emb: &EmbeddingMatrix,
    method: NetworkMethod,
    cutoff: f64,
    opts: &EgaOptions,
) -> Result<(ItemPool, UvaReport)> {
    if pool.len() < MIN_STAGE_ITEMS {
        return Err(Error::Size(format!(
            "UVA needs at least {MIN_STAGE_ITEMS} items, got {}",
            pool.len()
        )));
    }
    let mut current = pool.clone();
    let mut report = UvaReport {
        model: Some(method),
        n_removed: 0,
        n_sweeps: 0,
        redundant_pairs: Vec::new(),
        sweeps: Vec::new(),
        cutoff,
        truncated: false,
        skipped: false,
    };

    loop {
        let sweep = report.n_sweeps + 1;
        let ids = current.ids();
        let sub = emb.select(&ids)?;
        let corr = item_correlations(&sub)?;
        let net = estimate_network(&corr, method, sub.dims(), &opts.glasso)?;
        let wto = wto_matrix(&net);
        let plans = plan_sweep(&wto, &ids, cutoff);
        let n_drop: usize = plans.iter().map(|c| c.members.len() - 1).sum();
        report.n_sweeps = sweep;

        if n_drop > 0 && ids.len() - n_drop < MIN_STAGE_ITEMS {
            report.truncated = true;
            report.sweeps.push(UvaSweep {
                sweep,
                n_items: ids.len(),
                lambda: net.selection().map(|s| s.lambda),
                n_clusters: plans.len(),
                n_removed: 0,
            });
            break;
        }
        report.sweeps.push(UvaSweep {
            sweep,
            n_items: ids.len(),
            lambda: net.selection().map(|s| s.lambda),
            n_clusters: plans.len(),
            n_removed: n_drop,
        });
        if n_drop == 0 {
            break;
        }

        let mut dropped: HashSet<&str> = HashSet::new();
        for (cluster_id, plan) in plans.iter().enumerate() {
            let removed: Vec<String> = plan
                .members
                .iter()
                .filter(|&&m| m != plan.kept)
                .map(|&m| ids[m].clone())
                .collect();
            for &m in &plan.members {
                if m != plan.kept {
                    dropped.insert(ids[m].as_str());
                }
            }
            report.redundant_pairs.push(RedundancyDecision {
                sweep,
                cluster_id: cluster_id + 1,
                items: plan.members.iter().map(|&m| ids[m].clone()).collect(),
                kept: ids[plan.kept].clone(),
                removed,
                wto_max: plan.wto_max,
                kept_mean_wto: plan.kept_mean_wto,
            });
        }
        report.n_removed += dropped.len();
        let keep: HashSet<&str> = ids
            .iter()
            .map(String::as_str)
            .filter(|id| !dropped.contains(id))
            .collect();
        current = current.retain_ids(&keep);
    }
    Ok((current, report))
}

/// Write the redundancy log as CSV: `sweep,cluster_id,kept,removed,wto_max`,
/// with multiple removed ids joined by `;`.
pub fn write_uva_log_csv<W: Write>(report: &UvaReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sweep", "cluster_id", "kept", "removed", "wto_max"])?;
    for d in &report.redundant_pairs {
        w.write_record([
            d.sweep.to_string(),
            d.cluster_id.to_string(),
            d.kept.clone(),
            d.removed.join(";"),
            d.wto_max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
