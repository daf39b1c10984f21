//! Independent reference implementations used as test oracles.
//!
//! Everything here is deliberately naive: plain loops over `Vec`s, no shared
//! code with the library beyond its public types.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("i{i}")).collect()
}

/// Danon NMI (×100) straight from the contingency table.
pub fn nmi_oracle(a: &[u32], b: &[u32]) -> f64 {
    let n = a.len() as f64;
    let mut na: BTreeMap<u32, f64> = BTreeMap::new();
    let mut nb: BTreeMap<u32, f64> = BTreeMap::new();
    let mut nab: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *na.entry(x).or_default() += 1.0;
        *nb.entry(y).or_default() += 1.0;
        *nab.entry((x, y)).or_default() += 1.0;
    }
    match (na.len(), nb.len()) {
        (1, 1) => return 100.0,
        (1, _) | (_, 1) => return 0.0,
        _ => {}
    }
    let mut num = 0.0;
    for (&(x, y), &c) in &nab {
        num += c * (c * n / (na[&x] * nb[&y])).ln();
    }
    let ha: f64 = na.values().map(|&c| c * (c / n).ln()).sum();
    let hb: f64 = nb.values().map(|&c| c * (c / n).ln()).sum();
    100.0 * -2.0 * num / (ha + hb)
}

/// Random correlation matrix: sample correlation of `n` Gaussian rows mixed
/// through a random loading matrix so that entries are not all near zero.
pub fn random_correlation(p: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let mix = DMatrix::from_fn(p, p, |_, _| r.random::<f64>() * 2.0 - 1.0);
    let z = DMatrix::from_fn(n, p, |_, _| {
        let u1: f64 = r.random::<f64>().max(1e-300);
        let u2: f64 = r.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    });
    let x = z * mix;
    let mut c = DMatrix::zeros(p, p);
    let means: Vec<f64> = (0..p).map(|j| x.column(j).mean()).collect();
    for i in 0..p {
        for j in 0..p {
            let mut sxy = 0.0;
            let mut sxx = 0.0;
            let mut syy = 0.0;
            for k in 0..n {
                let dx = x[(k, i)] - means[i];
                let dy = x[(k, j)] - means[j];
                sxy += dx * dy;
                sxx += dx * dx;
                syy += dy * dy;
            }
            c[(i, j)] = sxy / (sxx * syy).sqrt();
        }
    }
    for i in 0..p {
        c[(i, i)] = 1.0;
    }
    c
}

/// TMFG by exhaustive scan: every step recomputes the gain of every
/// (outside vertex, face) pair from scratch. Faces are kept as a sorted set.
pub fn tmfg_oracle(c: &DMatrix<f64>) -> BTreeSet<(usize, usize)> {
    let p = c.nrows();
    let w = |i: usize, j: usize| c[(i, j)].abs();
    let mut strength: Vec<(f64, usize)> = (0..p)
        .map(|i| ((0..p).filter(|&j| j != i).map(|j| w(i, j)).sum::<f64>(), i))
        .collect();
    strength.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let seed: Vec<usize> = strength[..4].iter().map(|s| s.1).collect();
    let mut edges = BTreeSet::new();
    let mut faces: BTreeSet<[usize; 3]> = BTreeSet::new();
    for x in 0..4 {
        for y in (x + 1)..4 {
            edges.insert(ordered(seed[x], seed[y]));
            for z in (y + 1)..4 {
                faces.insert(sorted3(seed[x], seed[y], seed[z]));
            }
        }
    }
    let mut outside: BTreeSet<usize> = (0..p).filter(|v| !seed.contains(v)).collect();
    while !outside.is_empty() {
        let mut best: Option<(f64, usize, [usize; 3])> = None;
        for &v in &outside {
            for f in &faces {
                let g = w(v, f[0]) + w(v, f[1]) + w(v, f[2]);
                if best.map_or(true, |b| g > b.0) {
                    best = Some((g, v, *f));
                }
            }
        }
        let (_, v, f) = best.unwrap();
        outside.remove(&v);
        faces.remove(&f);
        for k in 0..3 {
            edges.insert(ordered(v, f[k]));
        }
        faces.insert(sorted3(f[0], f[1], v));
        faces.insert(sorted3(f[0], f[2], v));
        faces.insert(sorted3(f[1], f[2], v));
    }
    edges
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn sorted3(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}

/// Graphical lasso by ADMM on the precision matrix (diagonal unpenalised),
/// started from `(z, u)` and run to a 1e-12 residual. Returns the sparse
/// iterate `Z`, whose zeros are exact, and the scaled dual.
pub fn glasso_admm(
    s: &DMatrix<f64>,
    lambda: f64,
    mut z: DMatrix<f64>,
    mut u: DMatrix<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let p = s.nrows();
    let rho = 1.0;
    for _ in 0..100_000 {
        let m = (&z - &u) * rho - s;
        let eig = m.symmetric_eigen();
        let d = eig
            .eigenvalues
            .map(|l| (l + (l * l + 4.0 * rho).sqrt()) / (2.0 * rho));
        let theta = &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose();
        let v = &theta + &u;
        let mut z_new = v.clone();
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    let x = v[(i, j)];
                    z_new[(i, j)] = x.signum() * (x.abs() - lambda / rho).max(0.0);
                }
            }
        }
        let primal = (&theta - &z_new).abs().max();
        let dual = (&z_new - &z).abs().max() * rho;
        u += &theta - &z_new;
        z = z_new;
        if primal < 1e-12 && dual < 1e-12 {
            break;
        }
    }
    (z, u)
}

/// Exhaustive EBIC scan with the ADMM solver: selected index and support.
pub fn ebic_scan_oracle(
    s: &DMatrix<f64>,
    grid: &[f64],
    n_obs: usize,
    gamma: f64,
) -> (usize, BTreeSet<(usize, usize)>) {
    let p = s.nrows();
    let mut best: Option<(f64, usize, BTreeSet<(usize, usize)>)> = None;
    let mut z = DMatrix::<f64>::identity(p, p);
    let mut u = DMatrix::<f64>::zeros(p, p);
    for (idx, &lambda) in grid.iter().enumerate() {
        (z, u) = glasso_admm(s, lambda, z, u);
        let k = z.clone();
        let support: BTreeSet<(usize, usize)> = (0..p)
            .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
            .filter(|&(i, j)| k[(i, j)] != 0.0)
            .collect();
        // Refit loglik on the oracle's own estimate.
        let det = k.clone().determinant();
        let tr: f64 = (s * &k).trace();
        let ll = n_obs as f64 / 2.0 * (det.ln() - tr);
        let e = support.len() as f64;
        let score = -2.0 * ll + e * (n_obs as f64).ln() + 4.0 * e * gamma * (p as f64).ln();
        if best.as_ref().map_or(true, |b| score < b.0) {
            best = Some((score, idx, support));
        }
    }
    let (_, idx, support) = best.unwrap();
    (idx, support)
}

/// wTO by the defining sums, weights as clipped magnitudes.
pub fn wto_oracle(a: &DMatrix<f64>) -> DMatrix<f64> {
    let p = a.nrows();
    let w = |i: usize, j: usize| if i == j { 0.0 } else { a[(i, j)].abs().min(1.0) };
    let mut out = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let mut shared = 0.0;
            for u in 0..p {
                if u != i && u != j {
                    shared += w(i, u) * w(u, j);
                }
            }
            let ki: f64 = (0..p).map(|u| w(i, u)).sum();
            let kj: f64 = (0..p).map(|u| w(j, u)).sum();
            out[(i, j)] = (shared + w(i, j)) / (ki.min(kj) + 1.0 - w(i, j));
        }
    }
    out
}

/// Newman modularity of a labelling on absolute weights.
pub fn modularity_oracle(a: &DMatrix<f64>, labels: &[u32]) -> f64 {
    let p = a.nrows();
    let w = |i: usize, j: usize| if i == j { 0.0 } else { a[(i, j)].abs() };
    let k: Vec<f64> = (0..p).map(|i| (0..p).map(|j| w(i, j)).sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..p {
        for j in 0..p {
            if labels[i] == labels[j] {
                q += w(i, j) - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Connected components of `ω ≥ cutoff` by repeated flood fill, each with
/// the member of smallest mean wTO (ties to the smallest id) kept.
pub fn keep_rule_oracle(wto: &DMatrix<f64>, ids: &[String], cutoff: f64) -> Vec<(BTreeSet<String>, String)> {
    let p = wto.nrows();
    let mut seen = vec![false; p];
    let mut out = Vec::new();
    for start in 0..p {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < comp.len() {
            let i = comp[k];
            for j in 0..p {
                if !seen[j] && j != i && wto[(i, j)] >= cutoff {
                    seen[j] = true;
                    comp.push(j);
                }
            }
            k += 1;
        }
        if comp.len() < 2 {
            continue;
        }
        let mean = |i: usize| (0..p).filter(|&j| j != i).map(|j| wto[(i, j)]).sum::<f64>() / (p - 1) as f64;
        let kept = comp
            .iter()
            .copied()
            .min_by(|&x, &y| mean(x).total_cmp(&mean(y)).then(ids[x].cmp(&ids[y])))
            .unwrap();
        out.push((comp.iter().map(|&i| ids[i].clone()).collect(), ids[kept].clone()));
    }
    out
}

/// Symmetric random weighted graph with edge probability `density`.
pub fn random_graph(p: usize, density: f64, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            if r.random::<f64>() < density {
                let w = r.random::<f64>() * 2.0 - 1.0;
                a[(i, j)] = w;
                a[(j, i)] = w;
            }
        }
    }
    a
}

/// `k` orthonormal, mean-zero vectors of length `dims`.
pub fn orthonormal_centered(dims: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut m = DMatrix::from_fn(dims, k, |_, _| r.random::<f64>() - 0.5);
    for mut col in m.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let q = m.qr().q();
    (0..k).map(|j| q.column(j).iter().copied().collect()).collect()
}

/// Exact block embeddings: item `i` of block `b` is
/// `sqrt(r) f_b + sqrt(1 - r) e_i` with every `f` and `e` orthonormal, so
/// within-block correlations are exactly `r` and cross-block ones exactly 0.
pub fn block_embeddings(blocks: &[usize], r: f64, dims: usize, seed: u64) -> Vec<Vec<f64>> {
    let n: usize = blocks.iter().sum();
    let basis = orthonormal_centered(dims, blocks.len() + n, seed);
    let mut cols = Vec::new();
    let mut next = blocks.len();
    for (b, &size) in blocks.iter().enumerate() {
        for _ in 0..size {
            cols.push(
                basis[b]
                    .iter()
                    .zip(&basis[next])
                    .map(|(f, e)| r.sqrt() * f + (1.0 - r).sqrt() * e)
                    .collect(),
            );
            next += 1;
        }
    }
    cols
}
