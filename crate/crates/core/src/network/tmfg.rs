//! Triangulated Maximally Filtered Graph.
//!
//! Starts from the tetrahedron of the four vertices with the largest summed
//! absolute correlation, then repeatedly inserts the (vertex, face) pair with
//! the largest gain into a triangular face. The result is a maximal planar
//! graph with `3p - 6` edges whose weights are the signed correlations.

use nalgebra::DMatrix;

use super::{CorrelationMatrix, Network, NetworkMethod};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TmfgResult {
    pub network: Network,
    /// Triangular faces of the planar embedding (`2p - 4` of them).
    pub faces: Vec<[usize; 3]>,
    /// Vertices in insertion order (the seed tetrahedron first).
    pub order: Vec<usize>,
}

pub fn tmfg(c: &CorrelationMatrix) -> Result<Network> {
    tmfg_with_faces(c).map(|r| r.network)
}

pub fn tmfg_with_faces(c: &CorrelationMatrix) -> Result<TmfgResult> {
    let p = c.dim();
    if p < 4 {
        return Err(Error::Size(format!(
            "TMFG needs at least 4 items, got {p}; use glasso for smaller pools"
        )));
    }
    let abs = c.values().map(f64::abs);
    let strength: Vec<f64> = (0..p)
        .map(|i| (0..p).filter(|&j| j != i).map(|j| abs[(i, j)]).sum())
        .collect();

    let mut by_strength: Vec<usize> = (0..p).collect();
    // stable sort keeps the lower index first on ties
    by_strength.sort_by(|&a, &b| strength[b].total_cmp(&strength[a]));
    let mut seed = [by_strength[0], by_strength[1], by_strength[2], by_strength[3]];
    seed.sort_unstable();
    let [a, b, cc, d] = seed;

    let mut adj = DMatrix::<f64>::zeros(p, p);
    let link = |adj: &mut DMatrix<f64>, i: usize, j: usize| {
        let w = c.get(i, j);
        adj[(i, j)] = w;
        adj[(j, i)] = w;
    };
    for (i, &x) in seed.iter().enumerate() {
        for &y in &seed[i + 1..] {
            link(&mut adj, x, y);
        }
    }
    let mut faces = vec![[a, b, cc], [a, b, d], [a, cc, d], [b, cc, d]];
    let mut order: Vec<usize> = seed.to_vec();
    let mut remaining: Vec<usize> = (0..p).filter(|v| !seed.contains(v)).collect();

    let gain = |v: usize, f: &[usize; 3]| abs[(v, f[0])] + abs[(v, f[1])] + abs[(v, f[2])];

    while !remaining.is_empty() {
        let mut best: Option<(f64, usize, usize)> = None; // (gain, remaining idx, face idx)
        for (ri, &v) in remaining.iter().enumerate() {
            for (fi, f) in faces.iter().enumerate() {
                let g = gain(v, f);
                if best.is_none_or(|(bg, _, _)| g > bg) {
                    best = Some((g, ri, fi));
                }
            }
        }
        let (_, ri, fi) = best.expect("faces are never empty");
        let v = remaining.remove(ri);
        let [x, y, z] = faces[fi];
        link(&mut adj, v, x);
        link(&mut adj, v, y);
        link(&mut adj, v, z);
        faces[fi] = [x, y, v];
        faces.push([x, z, v]);
        faces.push([y, z, v]);
        order.push(v);
    }

    Ok(TmfgResult {
        network: Network::from_parts(adj, c.item_ids().to_vec(), NetworkMethod::Tmfg, None),
        faces,
        order,
    })
}
