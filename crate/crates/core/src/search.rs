//! The neighbor-search algorithms: single-pass fixed-radius search, start
//! radius estimation by sampling, and the multi-round unbounded search
//! with its radius-capped variant.
//!
//! The multi-round loop runs a full fixed-radius pass over the queries
//! that have not yet found `k` neighbors, prunes the ones that have, then
//! grows the radius by the configured factor and refits the tree. A query
//! resolved in a round with radius `r` has found at least `k` points
//! within `r`; the pass is exhaustive within `r`, so those `k` closest are
//! the global `k` closest and a resolved query is never revisited.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bvh::{Bvh, TraversalCounters, DEFAULT_LEAF_CAPACITY};
use crate::dataset::PointSet;
use crate::error::Error;
use crate::oracle;

pub const DEFAULT_GROWTH_FACTOR: f64 = 2.0;
pub const DEFAULT_SAMPLE_SIZE: usize = 100;
pub const DEFAULT_SAMPLE_K: usize = 4;

/// How the tree is updated when the radius grows between rounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RefitMode {
    /// Update bounds in place, keeping the topology.
    #[default]
    Refit,
    /// Construct a fresh tree each round (for comparison runs).
    Rebuild,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Number of neighbors each query must find.
    pub k: usize,
    /// Round-1 radius; sampled from the dataset when absent.
    pub start_radius: Option<f64>,
    /// Radius multiplier between rounds.
    pub growth_factor: f64,
    /// Safety cap on rounds; exceeding it is an error carrying the round log.
    pub max_rounds: Option<usize>,
    /// Largest radius the bounded variant will search.
    pub radius_cap: Option<f64>,
    /// Points drawn when sampling the start radius.
    pub sample_size: usize,
    /// Neighbors examined per sampled point.
    pub sample_k: usize,
    pub rng_seed: u64,
    pub leaf_capacity: usize,
    pub refit_mode: RefitMode,
}

impl SearchConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            start_radius: None,
            growth_factor: DEFAULT_GROWTH_FACTOR,
            max_rounds: None,
            radius_cap: None,
            sample_size: DEFAULT_SAMPLE_SIZE,
            sample_k: DEFAULT_SAMPLE_K,
            rng_seed: 0,
            leaf_capacity: DEFAULT_LEAF_CAPACITY,
            refit_mode: RefitMode::Refit,
        }
    }

    pub fn with_start_radius(mut self, radius: f64) -> Self {
        self.start_radius = Some(radius);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_radius_cap(mut self, cap: f64) -> Self {
        self.radius_cap = Some(cap);
        self
    }

    pub fn with_growth_factor(mut self, growth: f64) -> Self {
        self.growth_factor = growth;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |reason: String| Err(Error::InvalidConfig { reason });
        if self.k < 1 {
            return bad("k must be at least 1".into());
        }
        if !(self.growth_factor.is_finite() && self.growth_factor > 1.0) {
            return bad(format!(
                "growth factor must be finite and > 1, got {}",
                self.growth_factor
            ));
        }
        if self.sample_size < 1 {
            return bad("sample size must be at least 1".into());
        }
        if self.sample_k < 1 {
            return bad("sample k must be at least 1".into());
        }
        if self.leaf_capacity < 1 {
            return bad("leaf capacity must be at least 1".into());
        }
        if let Some(r) = self.start_radius {
            if !(r.is_finite() && r > 0.0) {
                return bad(format!("start radius must be finite and positive, got {r}"));
            }
        }
        if let Some(c) = self.radius_cap {
            if !(c.is_finite() && c > 0.0) {
                return bad(format!("radius cap must be finite and positive, got {c}"));
            }
        }
        if self.max_rounds == Some(0) {
            return bad("max rounds must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapEntry {
    dist_sq: f64,
    index: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded max-heap of (squared distance, point index) pairs holding the k
/// best candidates for one query. The root is the current worst entry.
/// Ties on distance keep the lower index; the query's own index is
/// rejected on insert.
#[derive(Clone, Debug)]
pub struct NeighborHeap {
    query: u32,
    capacity: usize,
    entries: BinaryHeap<HeapEntry>,
}

impl NeighborHeap {
    pub fn new(query: u32, capacity: usize) -> Self {
        Self {
            query,
            capacity,
            entries: BinaryHeap::with_capacity(capacity + 1),
        }
    }

    pub fn insert(&mut self, index: u32, dist_sq: f64) {
        if index == self.query {
            return;
        }
        let entry = HeapEntry { dist_sq, index };
        if self.entries.len() < self.capacity {
            self.entries.push(entry);
        } else if let Some(worst) = self.entries.peek() {
            if entry < *worst {
                self.entries.pop();
                self.entries.push(entry);
            }
        }
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn query(&self) -> u32 {
        self.query
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Consumes the heap into (indices, distances) ascending by
    /// (distance, index). Distances are actual, not squared.
    pub fn into_sorted_lists(self) -> (Vec<u32>, Vec<f64>) {
        let sorted = self.entries.into_sorted_vec();
        let mut indices = Vec::with_capacity(sorted.len());
        let mut dists = Vec::with_capacity(sorted.len());
        for entry in sorted {
            indices.push(entry.index);
            dists.push(crate::geom::inclusive_sqrt(entry.dist_sq));
        }
        (indices, dists)
    }
}

/// One round of the multi-round search, as recorded in the result log.
#[derive(Clone, Debug)]
pub struct SearchRound {
    pub round_index: usize,
    /// Search radius this round ran at.
    pub radius: f64,
    /// Queries still unresolved after this round's prune (the points left).
    pub active_queries: usize,
    pub resolved_this_round: usize,
    pub aabb_tests: u64,
    pub sphere_tests: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SearchTotals {
    pub aabb_tests: u64,
    pub sphere_tests: u64,
    pub rounds: usize,
    /// Wall time of the whole search call, sampling and refits included.
    pub elapsed: Duration,
    /// Time spent building plus refitting/rebuilding the tree.
    pub structure_update: Duration,
}

/// Final neighbor lists plus the per-round log.
#[derive(Clone, Debug)]
pub struct KnnResult {
    /// Per-query neighbor indices, ascending by distance (ties by index).
    pub neighbors: Vec<Vec<u32>>,
    /// Per-query distances matching `neighbors`.
    pub distances: Vec<Vec<f64>>,
    /// False only for queries cut short by a radius cap; such queries keep
    /// whatever partial list they had.
    pub resolved: Vec<bool>,
    pub rounds: Vec<SearchRound>,
    pub totals: SearchTotals,
    /// Radius of the last round that ran.
    pub final_radius: f64,
}

impl KnnResult {
    pub fn resolved_count(&self) -> usize {
        self.resolved.iter().filter(|&&r| r).count()
    }
}

/// One fixed-radius pass: clears and refills each heap with the k nearest
/// points within the tree's current radius of its query. `active` and
/// `heaps` are paired positionally. Queries run in parallel; returns the
/// summed counters.
pub fn fixed_radius_knns(
    points: &PointSet,
    active: &[u32],
    heaps: &mut [NeighborHeap],
    bvh: &Bvh<'_>,
) -> TraversalCounters {
    assert_eq!(active.len(), heaps.len(), "one heap per active query");
    active
        .par_iter()
        .zip(heaps.par_iter_mut())
        .map(|(&q, heap)| {
            debug_assert_eq!(heap.query(), q, "heap paired with the wrong query");
            heap.clear();
            let mut counters = TraversalCounters::new();
            bvh.query_point(points.get(q as usize), &mut counters, |index, dist_sq| {
                heap.insert(index, dist_sq);
            });
            counters
        })
        .reduce(TraversalCounters::new, |mut a, b| {
            a.merge(b);
            a
        })
}

/// Estimates a start radius: draw `sample_size` points without
/// replacement, find each one's `sample_k` nearest neighbors over the full
/// dataset by exact scan, and return the smallest neighbor distance seen.
///
/// Duplicate points can make that minimum zero; the smallest strictly
/// positive sampled distance is used instead. If every sampled distance is
/// zero the dataset is degenerate and an error is returned.
pub fn sample_start_radius(
    points: &PointSet,
    sample_size: usize,
    sample_k: usize,
    rng_seed: u64,
) -> Result<f64, Error> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DatasetTooSmall { n, k: 1 });
    }
    assert!(sample_size >= 1 && sample_k >= 1);

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let sampled = rand::seq::index::sample(&mut rng, n, sample_size.min(n));
    let k_eff = sample_k.min(n - 1);

    let mut min_dist = f64::INFINITY;
    let mut min_positive = f64::INFINITY;
    for query in sampled {
        for (_, dist) in oracle::knn_of_point(points, query, k_eff) {
            min_dist = min_dist.min(dist);
            if dist > 0.0 {
                min_positive = min_positive.min(dist);
            }
        }
    }
    if min_dist > 0.0 {
        Ok(min_dist)
    } else if min_positive.is_finite() {
        Ok(min_positive)
    } else {
        Err(Error::DegenerateDataset)
    }
}

/// Unbounded multi-round search: every query finds its exact k nearest
/// neighbors. `config.radius_cap` is not consulted; use
/// [`true_knn_bounded`] for the capped variant.
pub fn true_knn(points: &PointSet, config: &SearchConfig) -> Result<KnnResult, Error> {
    run_multi_round(points, config, None)
}

/// Radius-capped variant: the loop stops after the first round whose
/// radius would reach `config.radius_cap` (that round runs clamped to
/// exactly the cap). Queries still short of k neighbors are returned
/// unresolved with their partial lists.
pub fn true_knn_bounded(points: &PointSet, config: &SearchConfig) -> Result<KnnResult, Error> {
    let cap = config.radius_cap.ok_or_else(|| Error::InvalidConfig {
        reason: "bounded search needs radius_cap".into(),
    })?;
    run_multi_round(points, config, Some(cap))
}

/// Single-round fixed-radius search over all queries at `radius`. Heaps
/// that fill are exact within the radius; at the oracle's max k-th
/// neighbor distance every heap fills.
pub fn baseline_fixed_radius(
    points: &PointSet,
    k: usize,
    radius: f64,
    leaf_capacity: usize,
) -> Result<KnnResult, Error> {
    if k < 1 {
        return Err(Error::InvalidConfig {
            reason: "k must be at least 1".into(),
        });
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::InvalidConfig {
            reason: format!("radius must be finite and non-negative, got {radius}"),
        });
    }
    let n = points.len();
    let start = Instant::now();

    let build_start = Instant::now();
    let bvh = Bvh::build(points.points(), radius, leaf_capacity)?;
    let structure_update = build_start.elapsed();

    let active: Vec<u32> = (0..n as u32).collect();
    let mut heaps: Vec<NeighborHeap> = active
        .iter()
        .map(|&q| NeighborHeap::new(q, k))
        .collect();

    let round_start = Instant::now();
    let counters = fixed_radius_knns(points, &active, &mut heaps, &bvh);
    let round_elapsed = round_start.elapsed();

    let mut neighbors = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    let mut resolved = Vec::with_capacity(n);
    let mut resolved_count = 0usize;
    for heap in heaps {
        let full = heap.is_full();
        resolved_count += usize::from(full);
        resolved.push(full);
        let (idx, dist) = heap.into_sorted_lists();
        neighbors.push(idx);
        distances.push(dist);
    }

    let rounds = vec![SearchRound {
        round_index: 0,
        radius,
        active_queries: n - resolved_count,
        resolved_this_round: resolved_count,
        aabb_tests: counters.aabb_tests,
        sphere_tests: counters.sphere_tests,
        elapsed: round_elapsed,
    }];
    Ok(KnnResult {
        neighbors,
        distances,
        resolved,
        totals: SearchTotals {
            aabb_tests: counters.aabb_tests,
            sphere_tests: counters.sphere_tests,
            rounds: 1,
            elapsed: start.elapsed(),
            structure_update,
        },
        rounds,
        final_radius: radius,
    })
}

fn clamp_radius(scheduled: f64, cap: Option<f64>) -> (f64, bool) {
    match cap {
        Some(c) if scheduled >= c => (c, true),
        _ => (scheduled, false),
    }
}

fn run_multi_round(
    points: &PointSet,
    config: &SearchConfig,
    cap: Option<f64>,
) -> Result<KnnResult, Error> {
    config.validate()?;
    let n = points.len();
    if n <= config.k {
        return Err(Error::DatasetTooSmall { n, k: config.k });
    }

    let search_start = Instant::now();
    let start_radius = match config.start_radius {
        Some(r) => r,
        None => sample_start_radius(points, config.sample_size, config.sample_k, config.rng_seed)?,
    };
    let mut scheduled = start_radius;
    let (mut radius, mut final_round) = clamp_radius(scheduled, cap);

    let mut structure_update = Duration::ZERO;
    let build_start = Instant::now();
    let mut bvh = Bvh::build(points.points(), radius, config.leaf_capacity)?;
    structure_update += build_start.elapsed();

    let mut active: Vec<u32> = (0..n as u32).collect();
    let mut heaps: Vec<NeighborHeap> = active
        .iter()
        .map(|&q| NeighborHeap::new(q, config.k))
        .collect();

    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut distances: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut resolved = vec![false; n];
    let mut rounds: Vec<SearchRound> = Vec::new();

    loop {
        let round_start = Instant::now();
        let counters = fixed_radius_knns(points, &active, &mut heaps, &bvh);
        let round_elapsed = round_start.elapsed();

        let mut next_active = Vec::new();
        let mut next_heaps = Vec::new();
        let mut resolved_this_round = 0usize;
        for (q, heap) in active.drain(..).zip(heaps.drain(..)) {
            if heap.is_full() {
                let (idx, dist) = heap.into_sorted_lists();
                neighbors[q as usize] = idx;
                distances[q as usize] = dist;
                resolved[q as usize] = true;
                resolved_this_round += 1;
            } else {
                next_active.push(q);
                next_heaps.push(heap);
            }
        }
        active = next_active;
        heaps = next_heaps;

        rounds.push(SearchRound {
            round_index: rounds.len(),
            radius,
            active_queries: active.len(),
            resolved_this_round,
            aabb_tests: counters.aabb_tests,
            sphere_tests: counters.sphere_tests,
            elapsed: round_elapsed,
        });

        if active.is_empty() {
            break;
        }
        if final_round {
            // Cap reached: whatever is left keeps its partial list.
            for (q, heap) in active.drain(..).zip(heaps.drain(..)) {
                let (idx, dist) = heap.into_sorted_lists();
                neighbors[q as usize] = idx;
                distances[q as usize] = dist;
            }
            break;
        }
        if let Some(limit) = config.max_rounds {
            if rounds.len() >= limit {
                return Err(Error::MaxRoundsExceeded {
                    limit,
                    unresolved: active.len(),
                    rounds,
                });
            }
        }

        scheduled *= config.growth_factor;
        let (next_radius, next_final) = clamp_radius(scheduled, cap);
        radius = next_radius;
        final_round = next_final;

        let update_start = Instant::now();
        match config.refit_mode {
            RefitMode::Refit => bvh.refit(radius)?,
            RefitMode::Rebuild => {
                bvh = Bvh::build(points.points(), radius, config.leaf_capacity)?;
            }
        }
        structure_update += update_start.elapsed();
    }

    let totals = SearchTotals {
        aabb_tests: rounds.iter().map(|r| r.aabb_tests).sum(),
        sphere_tests: rounds.iter().map(|r| r.sphere_tests).sum(),
        rounds: rounds.len(),
        elapsed: search_start.elapsed(),
        structure_update,
    };
    Ok(KnnResult {
        neighbors,
        distances,
        resolved,
        rounds,
        totals,
        final_radius: radius,
    })
}
