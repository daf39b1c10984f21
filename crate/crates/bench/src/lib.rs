//! Shared inputs for the benchmarks: planted pools of a given size with
//! their embeddings and item correlations.

use aigenie_core::network::item_correlations;
use aigenie_core::synthetic::{planted_pool, PlantedSpec};
use aigenie_core::{CorrelationMatrix, EmbeddingMatrix};

pub struct Workload {
    pub embeddings: EmbeddingMatrix,
    pub correlations: CorrelationMatrix,
}

/// A pool of `n_attributes × per_attribute` items (no duplicates or
/// bridges) in 256 dimensions.
pub fn workload(n_attributes: usize, per_attribute: usize, seed: u64) -> Workload {
    let spec = PlantedSpec {
        n_attributes,
        items_per_attribute: per_attribute,
        n_duplicates: 0,
        n_bridges: 0,
        ..PlantedSpec::default()
    };
    let embeddings = planted_pool(&spec, seed).embeddings;
    let correlations = item_correlations(&embeddings).expect("planted embeddings have variance");
    Workload {
        embeddings,
        correlations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_has_the_requested_size() {
        let w = workload(3, 5, 1);
        assert_eq!(w.embeddings.n_items(), 15);
        assert_eq!(w.correlations.values().nrows(), 15);
    }
}
