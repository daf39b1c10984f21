mod support;

use aigenie_core::community::{modularity, walktrap, DEFAULT_STEPS};
use aigenie_core::network::{Network, NetworkMethod};
use nalgebra::DMatrix;
use rand::Rng;
use support::{ids, modularity_oracle, rng};

/// Two planted groups of six with noisy weak links between them.
fn planted(seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let mut a = DMatrix::zeros(12, 12);
    for i in 0..12 {
        for j in (i + 1)..12 {
            let same = (i < 6) == (j < 6);
            let w = if same {
                0.4 + 0.4 * r.random::<f64>()
            } else if r.random::<f64>() < 0.2 {
                0.1 * r.random::<f64>()
            } else {
                0.0
            };
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    a
}

#[test]
fn matches_best_bipartition_by_exhaustive_search() {
    for seed in 0..10 {
        let a = planted(seed);
        let net = Network::from_weights(a.clone(), ids(12), NetworkMethod::Glasso).unwrap();
        let part = walktrap(&net, DEFAULT_STEPS);

        let mut best = (f64::NEG_INFINITY, 0u32);
        // item 0 fixed in group 1, so 2^11 masks cover every bipartition
        for mask in 0u32..(1 << 11) {
            let labels: Vec<u32> = (0..12).map(|i| if i == 0 { 1 } else { 1 + ((mask >> (i - 1)) & 1) }).collect();
            let q = modularity_oracle(&a, &labels);
            if q > best.0 + 1e-12 {
                best = (q, mask);
            }
        }
        let best_labels: Vec<u32> = (0..12)
            .map(|i| if i == 0 { 1 } else { 1 + ((best.1 >> (i - 1)) & 1) })
            .collect();
        assert_eq!(part.labels(), best_labels.as_slice(), "seed {seed}");
        let q = modularity(&net, part.labels());
        assert!((q - best.0).abs() < 1e-12);
        assert!((q - modularity_oracle(&a, part.labels())).abs() < 1e-12);
    }
}
