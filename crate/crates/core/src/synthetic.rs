//! Planted-structure item pools with block embeddings.
//!
//! Each attribute has a latent direction; an item's embedding mixes its
//! attribute's direction with independent noise so that items sharing an
//! attribute correlate at about `within_r`. Optional near-duplicates copy an
//! existing item with a little noise, and bridge items sit exactly between
//! two attribute blocks.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedding::{EmbeddingKind, EmbeddingMatrix};
use crate::item::{Item, ItemPool, Provenance};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub item_type: String,
    pub n_attributes: usize,
    pub items_per_attribute: usize,
    pub dims: usize,
    pub within_r: f64,
    pub n_duplicates: usize,
    /// Noise share of a duplicate (its correlation with the source is about
    /// `1 - duplicate_noise`).
    pub duplicate_noise: f64,
    pub n_bridges: usize,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            item_type: "synthetic".into(),
            n_attributes: 4,
            items_per_attribute: 15,
            dims: 256,
            within_r: 0.6,
            n_duplicates: 6,
            duplicate_noise: 0.02,
            n_bridges: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedPool {
    pub pool: ItemPool,
    pub embeddings: EmbeddingMatrix,
    /// `(duplicate id, source id)`.
    pub duplicates: Vec<(String, String)>,
    pub bridges: Vec<String>,
}

fn attribute_name(a: usize) -> String {
    format!("facet{}", a + 1)
}

/// Generate a planted pool. Items are ordered: regular items by attribute,
/// then duplicates, then bridges. Bridge `b` joins attributes `2b` and
/// `2b + 1` (modulo the attribute count) and is labeled with the first, so
/// with enough attributes no two bridges share a block.
pub fn planted_pool(spec: &PlantedSpec, seed: u64) -> PlantedPool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |n: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    };
    let factors: Vec<Vec<f64>> = (0..spec.n_attributes).map(|_| normal(spec.dims, &mut rng)).collect();
    let load = spec.within_r.sqrt();
    let noise = (1.0 - spec.within_r).sqrt();

    let mut items = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut next = 1;
    let mut push = |items: &mut Vec<Item>, attribute: usize, what: &str| -> String {
        let id = format!("S{next}");
        next += 1;
        items.push(Item::new(
            id.clone(),
            format!("{what} statement {id} about {}", attribute_name(attribute)),
            attribute_name(attribute),
            spec.item_type.clone(),
        ));
        id
    };

    for (a, factor) in factors.iter().enumerate() {
        for _ in 0..spec.items_per_attribute {
            push(&mut items, a, "planted");
            let e = normal(spec.dims, &mut rng);
            columns.push(factor.iter().zip(&e).map(|(f, e)| load * f + noise * e).collect());
        }
    }

    let regular = items.len();
    let mut sources: Vec<usize> = (0..regular).collect();
    sources.shuffle(&mut rng);
    let mut duplicates = Vec::new();
    for &src in sources.iter().take(spec.n_duplicates.min(regular)) {
        let attribute = src / spec.items_per_attribute;
        let id = push(&mut items, attribute, "duplicate");
        let e = normal(spec.dims, &mut rng);
        let keep = (1.0 - spec.duplicate_noise).sqrt();
        let jitter = spec.duplicate_noise.sqrt();
        let col = columns[src].iter().zip(&e).map(|(x, e)| keep * x + jitter * e).collect();
        columns.push(col);
        duplicates.push((id, items[src].id.clone()));
    }

    // A bridge is built from the two blocks' sample centroids rather than the
    // latent factors, so its sample correlation with either block is the
    // same. Noise drawn from the latent model would lean it toward one side.
    let mut bridges = Vec::new();
    if spec.n_attributes >= 2 {
        let per = spec.items_per_attribute;
        let centroid = |a: usize| -> Vec<f64> {
            let mut c = vec![0.0; spec.dims];
            for col in &columns[a * per..(a + 1) * per] {
                for (x, v) in c.iter_mut().zip(col) {
                    *x += v;
                }
            }
            unit(centered(c))
        };
        let centroids: Vec<Vec<f64>> = (0..spec.n_attributes).map(centroid).collect();
        for b in 0..spec.n_bridges {
            let a = (2 * b) % spec.n_attributes;
            let c = (a + 1) % spec.n_attributes;
            let id = push(&mut items, a, "bridge");
            let ca = &centroids[a];
            let cc = unit(reject(centroids[c].clone(), ca));
            let toward = unit(ca.iter().zip(&centroids[c]).map(|(x, y)| x + y).collect());
            let e = unit(reject(reject(centered(normal(spec.dims, &mut rng)), ca), &cc));
            let scale = (spec.dims as f64).sqrt();
            columns.push(
                toward
                    .iter()
                    .zip(&e)
                    .map(|(t, e)| scale * (load * t + noise * e))
                    .collect(),
            );
            bridges.push(id);
        }
    }

    let ids: Vec<String> = items.iter().map(|i| i.id.clone()).collect();
    let flat: Vec<f64> = columns.concat();
    let embeddings = EmbeddingMatrix::new(
        DMatrix::from_vec(spec.dims, ids.len(), flat),
        ids,
        EmbeddingKind::Full,
    )
    .expect("finite synthetic embeddings");
    PlantedPool {
        pool: ItemPool::new(items, Provenance::UserSupplied),
        embeddings,
        duplicates,
        bridges,
    }
}

fn centered(mut v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    v.into_iter().map(|x| x / norm).collect()
}

/// Remove the component of `v` along the unit vector `u`.
fn reject(v: Vec<f64>, u: &[f64]) -> Vec<f64> {
    let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
    v.iter().zip(u).map(|(a, b)| a - d * b).collect()
}
