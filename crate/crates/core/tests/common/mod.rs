//! Shared fixtures for the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trueknn::dataset::{gen_clustered, gen_uniform, PointSet};
use trueknn::oracle::ExactKnn;

/// Seed of the pinned 5000-point sets used by the counter criteria.
pub const PINNED_SEED: u64 = 42;

pub fn pinned_clustered_outliers() -> PointSet {
    gen_clustered(5000, 5, 0.01, 0.001, PINNED_SEED)
}

pub fn pinned_uniform() -> PointSet {
    gen_uniform(5000, PINNED_SEED)
}

pub fn isqrt_floor(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    while k * k > n {
        k -= 1;
    }
    k
}

#[derive(Clone, Copy, Debug)]
pub enum Shape {
    Uniform,
    Clustered,
    ClusteredOutliers,
}

pub struct Instance {
    pub label: String,
    pub points: PointSet,
    pub k: usize,
    pub search_seed: u64,
}

/// Deterministic enumeration of randomized desk-scale instances covering
/// the cross product of dataset shapes and k choices.
pub fn randomized_instances(count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE57);
    (0..count)
        .map(|i| {
            let shape = match i % 3 {
                0 => Shape::Uniform,
                1 => Shape::Clustered,
                _ => Shape::ClusteredOutliers,
            };
            let n = rng.random_range(100..=5000);
            let k = match (i / 3) % 3 {
                0 => 1,
                1 => 5,
                _ => isqrt_floor(n),
            };
            let data_seed: u64 = rng.random();
            let search_seed: u64 = rng.random();
            let points = match shape {
                Shape::Uniform => gen_uniform(n, data_seed),
                Shape::Clustered => gen_clustered(n, 5, 0.01, 0.0, data_seed),
                Shape::ClusteredOutliers => gen_clustered(n, 5, 0.01, 0.005, data_seed),
            };
            Instance {
                label: format!("#{i} {shape:?} n={n} k={k}"),
                points,
                k,
                search_seed,
            }
        })
        .collect()
}

/// maxDist derived from already-computed exact lists.
pub fn max_from_lists(knn: &ExactKnn) -> f64 {
    knn.distances
        .iter()
        .map(|d| *d.last().unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}
