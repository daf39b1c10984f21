mod support;

use aigenie_core::network::{Network, NetworkMethod};
use aigenie_core::uva::wto_matrix;
use nalgebra::DMatrix;
use support::{ids, random_graph, wto_oracle};

#[test]
fn random_graphs_match_direct_formula() {
    for seed in 0..50 {
        let a = random_graph(8, 0.6, 500 + seed);
        let net = Network::from_weights(a.clone(), ids(8), NetworkMethod::Glasso).unwrap();
        let got = wto_matrix(&net);
        let want = wto_oracle(&a);
        for i in 0..8 {
            for j in 0..8 {
                assert!((got[(i, j)] - want[(i, j)]).abs() < 1e-12, "seed {seed} ({i},{j})");
            }
        }
    }
}

#[test]
fn triangle_with_equal_weights() {
    let a = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 0.5 });
    let net = Network::from_weights(a, ids(3), NetworkMethod::Glasso).unwrap();
    let w = wto_matrix(&net);
    // (0.25 + 0.5) / (1 + 1 - 0.5)
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        assert!((w[(i, j)] - 0.5).abs() < 1e-15);
    }
}
