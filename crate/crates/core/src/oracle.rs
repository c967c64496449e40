//! Brute-force reference implementations.
//!
//! Every answer here comes from a linear scan over the dataset, so these
//! functions can check the tree-based search without sharing any code path
//! with it beyond point arithmetic. They are O(n^2) by design and meant
//! for desk-scale inputs.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::dataset::PointSet;
use crate::error::Error;
use crate::geom::{inclusive_sqrt, squared_distance};

/// Exact per-query neighbor lists: `neighbors[q]` and `distances[q]` are
/// ascending by distance, self excluded, ties broken by lower index.
#[derive(Clone, Debug)]
pub struct ExactKnn {
    pub k: usize,
    pub neighbors: Vec<Vec<u32>>,
    pub distances: Vec<Vec<f64>>,
}

fn cmp_candidates(a: &(f64, u32), b: &(f64, u32)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// The `k` nearest neighbors of one point by full scan, ascending by
/// (distance, index), self excluded. Distances are actual, not squared.
pub fn knn_of_point(points: &PointSet, query: usize, k: usize) -> Vec<(u32, f64)> {
    let q = points.get(query);
    let mut candidates: Vec<(f64, u32)> = points
        .points()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != query)
        .map(|(i, p)| (squared_distance(q, *p), i as u32))
        .collect();
    let k = k.min(candidates.len());
    if k == 0 {
        return Vec::new();
    }
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k - 1, cmp_candidates);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(cmp_candidates);
    candidates
        .into_iter()
        .map(|(d2, i)| (i, inclusive_sqrt(d2)))
        .collect()
}

/// Exact k-nearest-neighbor lists for every point.
pub fn exact_knn(points: &PointSet, k: usize) -> Result<ExactKnn, Error> {
    let n = points.len();
    if n <= k {
        return Err(Error::DatasetTooSmall { n, k });
    }
    let per_query: Vec<(Vec<u32>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|q| knn_of_point(points, q, k).into_iter().unzip())
        .collect();
    let (neighbors, distances) = per_query.into_iter().unzip();
    Ok(ExactKnn {
        k,
        neighbors,
        distances,
    })
}

/// Indices of all points within `radius` of point `query` (boundary
/// inclusive, self excluded), ascending by index.
pub fn exact_fixed_radius(points: &PointSet, query: usize, radius: f64) -> Vec<u32> {
    let q = points.get(query);
    let r2 = radius * radius;
    points
        .points()
        .iter()
        .enumerate()
        .filter(|&(i, p)| i != query && squared_distance(q, *p) <= r2)
        .map(|(i, _)| i as u32)
        .collect()
}

/// Each point's distance to its `k`-th nearest neighbor.
pub fn kth_neighbor_distances(points: &PointSet, k: usize) -> Result<Vec<f64>, Error> {
    let n = points.len();
    if n <= k {
        return Err(Error::DatasetTooSmall { n, k });
    }
    Ok((0..n)
        .into_par_iter()
        .map(|query| {
            let q = points.get(query);
            let mut d2: Vec<f64> = points
                .points()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != query)
                .map(|(_, p)| squared_distance(q, *p))
                .collect();
            let (_, kth, _) = d2.select_nth_unstable_by(k - 1, f64::total_cmp);
            inclusive_sqrt(*kth)
        })
        .collect())
}

/// The largest k-th-neighbor distance over all points: the smallest fixed
/// radius at which a single-pass search resolves every query.
pub fn max_knn_distance(points: &PointSet, k: usize) -> Result<f64, Error> {
    let dists = kth_neighbor_distances(points, k)?;
    Ok(dists.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Nearest-rank percentile of a non-empty value set.
pub fn nearest_rank(values: &[f64], pct: f64) -> f64 {
    assert!(!values.is_empty());
    assert!(pct > 0.0 && pct <= 100.0, "percentile must be in (0, 100]");
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.max(1) - 1]
}

/// Nearest-rank percentile of the per-point k-th-neighbor distances.
pub fn percentile_knn_distance(points: &PointSet, k: usize, pct: f64) -> Result<f64, Error> {
    if !(pct > 0.0 && pct <= 100.0) {
        return Err(Error::InvalidConfig {
            reason: format!("percentile must be in (0, 100], got {pct}"),
        });
    }
    let dists = kth_neighbor_distances(points, k)?;
    Ok(nearest_rank(&dists, pct))
}
