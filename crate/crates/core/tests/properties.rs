//! Property tests for the geometric primitives, the tree, and the heap.

use proptest::prelude::*;

use trueknn::bvh::Bvh;
use trueknn::dataset::{Dimensionality, PointSet};
use trueknn::geom::{point_in_sphere, squared_distance, Aabb, Point3, Sphere};
use trueknn::search::NeighborHeap;
use trueknn::TraversalCounters;

fn coordinate() -> impl Strategy<Value = f64> {
    -100.0..100.0f64
}

fn point() -> impl Strategy<Value = Point3> {
    (coordinate(), coordinate(), coordinate()).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn cloud(max: usize) -> impl Strategy<Value = Vec<Point3>> {
    prop::collection::vec(point(), 1..max)
}

fn collect_visits(bvh: &Bvh<'_>, q: Point3) -> (Vec<u32>, TraversalCounters) {
    let mut counters = TraversalCounters::new();
    let mut seen = Vec::new();
    bvh.query_point(q, &mut counters, |i, _| seen.push(i));
    seen.sort_unstable();
    (seen, counters)
}

fn in_radius(points: &[Point3], q: Point3, radius: f64) -> Vec<u32> {
    let r2 = radius * radius;
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| squared_distance(q, **p) <= r2)
        .map(|(i, _)| i as u32)
        .collect()
}

proptest! {
    #[test]
    fn sphere_hit_implies_box_hit(p in point(), center in point(), radius in 0.0..50.0f64) {
        let sphere = Sphere::new(center, radius);
        if point_in_sphere(p, sphere) {
            prop_assert!(Aabb::of_sphere(sphere).contains(p));
        }
    }

    #[test]
    fn squared_distance_is_symmetric(a in point(), b in point()) {
        prop_assert_eq!(squared_distance(a, b), squared_distance(b, a));
        prop_assert_eq!(squared_distance(a, a), 0.0);
        prop_assert!(squared_distance(a, b) >= 0.0);
    }

    #[test]
    fn traversal_equals_linear_scan(
        points in cloud(200),
        radius in 0.0..5.0f64,
        queries in prop::collection::vec(point(), 1..6),
        leaf_capacity in 1usize..8,
    ) {
        let bvh = Bvh::build(&points, radius, leaf_capacity).unwrap();
        for q in queries {
            let (seen, counters) = collect_visits(&bvh, q);
            prop_assert_eq!(&seen, &in_radius(&points, q, radius));
            prop_assert!(counters.sphere_tests <= points.len() as u64);
            prop_assert!(counters.aabb_tests <= (bvh.node_count() + points.len()) as u64);
        }
    }

    #[test]
    fn refit_equals_rebuild(
        points in cloud(200),
        r0 in 0.0..2.0f64,
        grow in 1.0..8.0f64,
        queries in prop::collection::vec(point(), 1..6),
    ) {
        let r1 = r0 * grow;
        let mut refitted = Bvh::build(&points, r0, 4).unwrap();
        refitted.refit(r1).unwrap();
        let rebuilt = Bvh::build(&points, r1, 4).unwrap();
        prop_assert_eq!(refitted.nodes(), rebuilt.nodes());
        for q in queries {
            let (a, ca) = collect_visits(&refitted, q);
            let (b, cb) = collect_visits(&rebuilt, q);
            prop_assert_eq!(a, b);
            prop_assert_eq!(ca, cb);
        }
    }

    #[test]
    fn heap_keeps_the_lexicographically_smallest(
        entries in prop::collection::vec((0u32..64, 0.0..10.0f64), 1..80),
        capacity in 1usize..8,
    ) {
        let query = 1_000u32; // outside the index range above
        let mut heap = NeighborHeap::new(query, capacity);
        for &(i, d2) in &entries {
            heap.insert(i, d2);
        }
        let (got_idx, _) = heap.into_sorted_lists();

        let mut expected: Vec<(f64, u32)> =
            entries.iter().map(|&(i, d2)| (d2, i)).collect();
        expected.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let expected_idx: Vec<u32> = expected
            .into_iter()
            .take(capacity)
            .map(|(_, i)| i)
            .collect();
        prop_assert_eq!(got_idx, expected_idx);
    }

    #[test]
    fn generated_sets_satisfy_invariants(n in 1usize..300, seed in any::<u64>()) {
        let set = trueknn::dataset::gen_uniform(n, seed);
        prop_assert_eq!(set.len(), n);
        prop_assert!(set.points().iter().all(|p| p.is_finite()));
        let set = trueknn::dataset::gen_clustered(n, 3, 0.05, 0.01, seed);
        prop_assert_eq!(set.len(), n);
        prop_assert!(set.points().iter().all(|p| p.is_finite()));
    }
}

#[test]
fn cross_module_fixed_radius_agreement() {
    // The oracle's fixed-radius scan and the tree traversal must agree on
    // dataset points as queries, self excluded on the oracle side only.
    let set = trueknn::dataset::gen_uniform(1000, 2024);
    let radius = 0.2;
    let bvh = Bvh::build(set.points(), radius, 4).unwrap();
    for q in (0..set.len()).step_by(37) {
        let (mut seen, _) = collect_visits(&bvh, set.get(q));
        seen.retain(|&i| i != q as u32);
        let expected = trueknn::oracle::exact_fixed_radius(&set, q, radius);
        assert_eq!(seen, expected, "query {q}");
    }
}

#[test]
fn large_fixed_seed_tree_matches_scan() {
    let set = trueknn::dataset::gen_clustered(2000, 6, 0.02, 0.01, 7);
    let radius = 0.05;
    let bvh = Bvh::build(set.points(), radius, 4).unwrap();
    for q in [
        Point3::new(0.5, 0.5, 0.5),
        Point3::new(-4.0, 5.0, 0.0),
        Point3::new(0.0, 0.0, 0.0),
    ] {
        let (seen, _) = collect_visits(&bvh, q);
        assert_eq!(seen, in_radius(set.points(), q, radius));
    }
}

#[test]
fn prefix_loading_matches_truncation() {
    use std::io::Write;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    for i in 0..10 {
        writeln!(f, "{},{}", i, i * 2).unwrap();
    }
    f.flush().unwrap();
    let all = trueknn::dataset::load_csv(f.path(), None, None).unwrap();
    for limit in 1..=10 {
        let limited = trueknn::dataset::load_csv(f.path(), None, Some(limit)).unwrap();
        assert_eq!(limited.points(), all.truncated(limit).points());
        assert_eq!(limited.dimensionality(), Dimensionality::TwoD);
    }
}

#[test]
fn pointset_prefix_keeps_validity() {
    let set = PointSet::new(
        vec![Point3::new(1.0, 2.0, 0.0), Point3::new(3.0, 4.0, 0.0)],
        Dimensionality::TwoD,
        "mini",
    )
    .unwrap();
    let t = set.truncated(1);
    assert_eq!(t.len(), 1);
    assert_eq!(t.source_name(), "mini");
}
