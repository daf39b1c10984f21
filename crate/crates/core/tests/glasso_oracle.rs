mod support;

use std::collections::BTreeSet;

use aigenie_core::network::{ebic_glasso, glasso, lambda_grid, CorrelationMatrix, GlassoOptions};
use nalgebra::DMatrix;
use support::{ebic_scan_oracle, ids, random_correlation};

#[test]
fn four_variable_ebic_selection_matches_dense_scan() {
    let opts = GlassoOptions::default();
    let n_obs = 60;
    for seed in 0..50 {
        let s = random_correlation(4, n_obs, 300 + seed);
        let c = CorrelationMatrix::new(s.clone(), ids(4)).unwrap();
        let net = ebic_glasso(&c, n_obs, &opts).unwrap();
        let sel = net.selection().unwrap();
        let grid = lambda_grid(&s, opts.n_lambda, opts.lambda_min_ratio);
        let (idx, support) = ebic_scan_oracle(&s, &grid, n_obs, opts.gamma);
        let got: BTreeSet<(usize, usize)> = net.edges().iter().map(|&(i, j, _)| (i, j)).collect();
        assert_eq!(sel.lambda_index, idx, "seed {seed}");
        assert_eq!(got, support, "seed {seed}");
    }
}

#[test]
fn two_block_structure_keeps_only_within_block_edges() {
    let mut s = DMatrix::identity(4, 4);
    for (i, j) in [(0, 1), (2, 3)] {
        s[(i, j)] = 0.7;
        s[(j, i)] = 0.7;
    }
    let c = CorrelationMatrix::new(s, ids(4)).unwrap();
    let net = ebic_glasso(&c, 200, &GlassoOptions::default()).unwrap();
    let edges: Vec<(usize, usize)> = net.edges().iter().map(|&(i, j, _)| (i, j)).collect();
    assert_eq!(edges, vec![(0, 1), (2, 3)]);
}

#[test]
fn identity_correlation_gives_empty_graph() {
    let c = CorrelationMatrix::new(DMatrix::identity(6, 6), ids(6)).unwrap();
    let net = ebic_glasso(&c, 100, &GlassoOptions::default()).unwrap();
    assert_eq!(net.edge_count(), 0);
}

#[test]
fn single_lambda_fit_satisfies_stationarity() {
    // W = Θ⁻¹ and |W_ij - S_ij| <= λ with equality on the support.
    let s = random_correlation(8, 40, 9);
    let lambda = 0.1;
    let fit = glasso(&s, lambda, &GlassoOptions { tol: 1e-10, ..Default::default() }).unwrap();
    let w = fit.precision.clone().try_inverse().unwrap();
    for i in 0..8 {
        for j in 0..8 {
            let g = w[(i, j)] - s[(i, j)];
            if i == j {
                assert!(g.abs() < 1e-6);
            } else if fit.precision[(i, j)] != 0.0 {
                assert!((g.abs() - lambda).abs() < 1e-5, "({i},{j}) {g}");
            } else {
                assert!(g.abs() <= lambda + 1e-6, "({i},{j}) {g}");
            }
        }
    }
}
