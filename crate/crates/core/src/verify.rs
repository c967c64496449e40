//! Tie-aware comparison of search results against exact reference lists.
//!
//! Index lists must match exactly except among candidates tied at the k-th
//! distance, where either side may keep any of the tied points. Distance
//! lists must agree elementwise within a relative tolerance.

use std::collections::BTreeSet;
use std::fmt;

use crate::dataset::PointSet;
use crate::geom::{inclusive_sqrt, squared_distance};
use crate::oracle::ExactKnn;
use crate::search::KnnResult;

/// Relative closeness: |a - b| within `tol` of the larger magnitude.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub query: usize,
    pub reason: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "query {}: {}", self.query, self.reason)
    }
}

impl std::error::Error for Mismatch {}

/// Checks every resolved query of `result` against the reference lists.
/// Unresolved queries (possible only under a radius cap) are skipped.
pub fn knn_matches_oracle(
    points: &PointSet,
    result: &KnnResult,
    reference: &ExactKnn,
    tol: f64,
) -> Result<(), Mismatch> {
    let n = points.len();
    if result.neighbors.len() != n || reference.neighbors.len() != n {
        return Err(Mismatch {
            query: 0,
            reason: format!(
                "result covers {} queries and reference {}, dataset has {}",
                result.neighbors.len(),
                reference.neighbors.len(),
                n
            ),
        });
    }
    for q in 0..n {
        if !result.resolved[q] {
            continue;
        }
        query_lists_match(
            points,
            q,
            &result.neighbors[q],
            &result.distances[q],
            &reference.neighbors[q],
            &reference.distances[q],
            tol,
        )?;
    }
    Ok(())
}

/// Compares one query's (indices, distances) against the reference pair.
pub fn query_lists_match(
    points: &PointSet,
    query: usize,
    got_idx: &[u32],
    got_dist: &[f64],
    exp_idx: &[u32],
    exp_dist: &[f64],
    tol: f64,
) -> Result<(), Mismatch> {
    let fail = |reason: String| {
        Err(Mismatch {
            query,
            reason,
        })
    };
    if got_idx.len() != exp_idx.len() {
        return fail(format!(
            "expected {} neighbors, got {}",
            exp_idx.len(),
            got_idx.len()
        ));
    }
    if got_idx.contains(&(query as u32)) {
        return fail("list contains the query itself".into());
    }
    for (j, (&g, &e)) in got_dist.iter().zip(exp_dist).enumerate() {
        if !rel_close(g, e, tol) {
            return fail(format!("distance {j} is {g}, expected {e}"));
        }
    }
    if got_idx == exp_idx {
        return Ok(());
    }

    let got_set: BTreeSet<u32> = got_idx.iter().copied().collect();
    if got_set.len() != got_idx.len() {
        return fail("list contains duplicate indices".into());
    }
    let exp_set: BTreeSet<u32> = exp_idx.iter().copied().collect();
    let Some(&kth) = exp_dist.last() else {
        return Ok(());
    };

    // Every disagreement must sit exactly at the k-th distance.
    for &missing in exp_set.difference(&got_set) {
        let pos = exp_idx.iter().position(|&i| i == missing).unwrap();
        let d = exp_dist[pos];
        if !rel_close(d, kth, tol) {
            return fail(format!(
                "missing neighbor {missing} at distance {d}, not tied with k-th {kth}"
            ));
        }
    }
    let q_point = points.get(query);
    for &extra in got_set.difference(&exp_set) {
        let d = inclusive_sqrt(squared_distance(q_point, points.get(extra as usize)));
        if !rel_close(d, kth, tol) {
            return fail(format!(
                "extra neighbor {extra} at distance {d}, not tied with k-th {kth}"
            ));
        }
    }
    Ok(())
}
