use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::network::Network;
use crate::partition::Partition;

pub const DEFAULT_STEPS: usize = 4;

struct Cluster {
    members: Vec<usize>,
    /// `P^t_{C.} / sqrt(d)` averaged over members.
    profile: Vec<f64>,
    strength: f64,
}

/// Walktrap community detection on absolute edge weights.
///
/// Every vertex gets a self-loop with the mean weight of its incident edges
/// (weight 1 for isolated vertices) before the random-walk transition matrix
/// is formed. Adjacent communities are merged greedily by smallest increase
/// in the Ward-style distance between their `steps`-step walk profiles, and the
/// dendrogram is cut at the level with the highest weighted modularity
/// (computed on the loop-free graph; the earliest level wins ties).
pub fn walktrap(net: &Network, steps: usize) -> Partition {
    let n = net.len();
    let ids = net.item_ids().to_vec();
    if n == 0 {
        return Partition::canonical(ids, &[]);
    }
    let a = net.weights().map(f64::abs);

    let mut walk = a.clone();
    let mut degree = vec![0.0; n];
    for i in 0..n {
        let row = a.row(i);
        let neighbours = row.iter().filter(|w| **w > 0.0).count();
        let total: f64 = row.iter().sum();
        walk[(i, i)] = if neighbours > 0 { total / neighbours as f64 } else { 1.0 };
        degree[i] = total + walk[(i, i)];
    }
    let mut transition = walk.clone();
    for i in 0..n {
        for j in 0..n {
            transition[(i, j)] /= degree[i];
        }
    }
    let pt = matrix_power(&transition, steps);

    let strength: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let two_m: f64 = strength.iter().sum();

    let mut clusters: BTreeMap<usize, Cluster> = BTreeMap::new();
    for i in 0..n {
        let profile = (0..n).map(|k| pt[(i, k)] / degree[k].sqrt()).collect();
        clusters.insert(
            i,
            Cluster {
                members: vec![i],
                profile,
                strength: strength[i],
            },
        );
    }

    // Candidate merges keyed by (delta sigma, lower id, higher id) so the
    // smallest key is both the best merge and the deterministic tie-break.
    let mut neighbours: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut queue: BTreeSet<(OrdF64, usize, usize)> = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] > 0.0 {
                neighbours.entry(i).or_default().insert(j);
                neighbours.entry(j).or_default().insert(i);
                let d = delta_sigma(&clusters[&i], &clusters[&j], n);
                queue.insert((OrdF64(d), i, j));
            }
        }
    }

    let mut community: Vec<usize> = (0..n).collect();
    let mut modularity = if two_m > 0.0 {
        -strength.iter().map(|k| (k / two_m).powi(2)).sum::<f64>()
    } else {
        0.0
    };
    let mut best_q = modularity;
    let mut best = community.clone();
    let mut next_id = n;

    while let Some((_, c1, c2)) = queue.pop_first() {
        let left = clusters.remove(&c1).expect("queued cluster exists");
        let right = clusters.remove(&c2).expect("queued cluster exists");

        let between: f64 = left
            .members
            .iter()
            .flat_map(|&i| right.members.iter().map(move |&j| (i, j)))
            .map(|(i, j)| a[(i, j)])
            .sum();
        modularity += 2.0 * between / two_m - 2.0 * left.strength * right.strength / (two_m * two_m);

        let (nl, nr) = (left.members.len() as f64, right.members.len() as f64);
        let profile = left
            .profile
            .iter()
            .zip(&right.profile)
            .map(|(x, y)| (nl * x + nr * y) / (nl + nr))
            .collect();
        let mut members = left.members;
        members.extend(right.members);
        for &m in &members {
            community[m] = next_id;
        }
        let merged = Cluster {
            members,
            profile,
            strength: left.strength + right.strength,
        };

        let mut adjacent = BTreeSet::new();
        for old in [c1, c2] {
            for other in neighbours.remove(&old).unwrap_or_default() {
                if other == c1 || other == c2 {
                    continue;
                }
                let set = neighbours.get_mut(&other).expect("symmetric adjacency");
                set.remove(&old);
                adjacent.insert(other);
            }
        }
        queue.retain(|&(_, x, y)| x != c1 && x != c2 && y != c1 && y != c2);
        for &other in &adjacent {
            let d = delta_sigma(&merged, &clusters[&other], n);
            queue.insert((OrdF64(d), other, next_id));
            neighbours.get_mut(&other).expect("present").insert(next_id);
        }
        neighbours.insert(next_id, adjacent);
        clusters.insert(next_id, merged);
        next_id += 1;

        if modularity > best_q {
            best_q = modularity;
            best.clone_from(&community);
        }
    }

    Partition::canonical(ids, &best)
}

fn delta_sigma(c1: &Cluster, c2: &Cluster, n: usize) -> f64 {
    let (s1, s2) = (c1.members.len() as f64, c2.members.len() as f64);
    let dist2: f64 = c1
        .profile
        .iter()
        .zip(&c2.profile)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    s1 * s2 / (s1 + s2) * dist2 / n as f64
}

fn matrix_power(m: &DMatrix<f64>, t: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..t {
        out = &out * m;
    }
    out
}

/// Weighted Newman modularity of a partition on absolute edge weights.
pub fn modularity(net: &Network, labels: &[u32]) -> f64 {
    let a = net.weights().map(f64::abs);
    let n = net.len();
    let strength: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let two_m: f64 = strength.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[(i, j)] - strength[i] * strength[j] / two_m;
            }
        }
    }
    q / two_m
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
