//! Acceptance suite: one test per library-level criterion, each printing a
//! pass line (run with `--nocapture` to see them). The CLI determinism
//! criterion lives in the CLI crate's own acceptance tests.

mod common;

use std::time::{Duration, Instant};

use common::{
    isqrt_floor, max_from_lists, pinned_clustered_outliers, pinned_uniform,
    randomized_instances, PINNED_SEED,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trueknn::bvh::Bvh;
use trueknn::dataset::gen_uniform;
use trueknn::geom::Point3;
use trueknn::oracle;
use trueknn::search::{baseline_fixed_radius, sample_start_radius, true_knn, true_knn_bounded, SearchConfig};
use trueknn::verify;

const TOL: f64 = 1e-9;

/// Criterion 1: on 50 randomized desk-scale instances the multi-round
/// search reproduces the exact oracle lists (distances within 1e-9
/// relative, indices equal modulo k-th-distance ties).
#[test]
fn criterion_1_exactness() {
    let instances = randomized_instances(50);
    for inst in &instances {
        let config = SearchConfig::new(inst.k).with_seed(inst.search_seed);
        let result = true_knn(&inst.points, &config).unwrap();
        let reference = oracle::exact_knn(&inst.points, inst.k).unwrap();
        verify::knn_matches_oracle(&inst.points, &result, &reference, TOL)
            .unwrap_or_else(|m| panic!("instance {}: {m}", inst.label));
        assert_eq!(
            result.resolved_count(),
            inst.points.len(),
            "instance {}: unresolved queries",
            inst.label
        );
    }
    println!("ACCEPTANCE C1 exactness: PASS ({} instances)", instances.len());
}

/// Criterion 2: on the pinned clustered+outlier set the single-pass
/// baseline at maxDist performs at least 2x the sphere tests of the
/// multi-round search, for k = 5 and k = floor(sqrt(n)).
#[test]
fn criterion_2_counter_dominance_with_outliers() {
    let set = pinned_clustered_outliers();

    // Pinned-geometry precondition: outliers must dominate maxDist.
    let maxd5 = oracle::max_knn_distance(&set, 5).unwrap();
    let p99 = oracle::percentile_knn_distance(&set, 5, 99.0).unwrap();
    assert!(
        maxd5 >= 5.0 * p99,
        "pinned set lost its outlier margin: maxDist {maxd5} vs p99 {p99}"
    );

    let mut ratios = Vec::new();
    for k in [5, isqrt_floor(set.len())] {
        let maxd = oracle::max_knn_distance(&set, k).unwrap();
        let baseline = baseline_fixed_radius(&set, k, maxd, 4).unwrap();
        let multi = true_knn(&set, &SearchConfig::new(k).with_seed(PINNED_SEED)).unwrap();
        assert!(
            multi.totals.sphere_tests < baseline.totals.sphere_tests,
            "k={k}: no counter advantage"
        );
        let ratio = baseline.totals.sphere_tests as f64 / multi.totals.sphere_tests as f64;
        assert!(ratio >= 2.0, "k={k}: ratio {ratio:.2} below the 2x floor");
        ratios.push((k, ratio));
    }
    println!(
        "ACCEPTANCE C2 counter dominance with outliers: PASS (ratios {})",
        ratios
            .iter()
            .map(|(k, r)| format!("k={k}: {r:.1}x"))
            .collect::<Vec<_>>()
            .join(", ")
    );
}

/// Criterion 3: the counter advantage persists without outliers
/// (uniform [0,1]^3, n = 5000, k = 5; ratio > 1).
#[test]
fn criterion_3_counter_advantage_uniform() {
    let set = pinned_uniform();
    let k = 5;
    let maxd = oracle::max_knn_distance(&set, k).unwrap();
    let baseline = baseline_fixed_radius(&set, k, maxd, 4).unwrap();
    let multi = true_knn(&set, &SearchConfig::new(k).with_seed(PINNED_SEED)).unwrap();
    let ratio = baseline.totals.sphere_tests as f64 / multi.totals.sphere_tests as f64;
    assert!(ratio > 1.0, "ratio {ratio:.3} not above 1");
    println!("ACCEPTANCE C3 counter advantage without outliers: PASS (ratio {ratio:.2}x)");
}

/// Criterion 4: with the radius capped at the oracle's 99th-percentile
/// k-th distance, at least 99% of queries resolve, every resolved query
/// matches the oracle, and the capped search still beats a single
/// fixed-radius pass at the same cap.
#[test]
fn criterion_4_percentile_variant() {
    let set = pinned_clustered_outliers();
    let k = 5;
    let cap = oracle::percentile_knn_distance(&set, k, 99.0).unwrap();

    let config = SearchConfig::new(k)
        .with_seed(PINNED_SEED)
        .with_radius_cap(cap);
    let bounded = true_knn_bounded(&set, &config).unwrap();

    let resolved = bounded.resolved_count();
    let needed = (0.99 * set.len() as f64).ceil() as usize;
    assert!(
        resolved >= needed,
        "only {resolved} of {} resolved at the p99 cap",
        set.len()
    );

    let reference = oracle::exact_knn(&set, k).unwrap();
    verify::knn_matches_oracle(&set, &bounded, &reference, TOL).unwrap();

    let single_pass = baseline_fixed_radius(&set, k, cap, 4).unwrap();
    assert!(
        bounded.totals.sphere_tests < single_pass.totals.sphere_tests,
        "{} vs {}",
        bounded.totals.sphere_tests,
        single_pass.totals.sphere_tests
    );
    println!(
        "ACCEPTANCE C4 99th-percentile variant: PASS ({resolved}/{} resolved, {:.2}x fewer sphere tests than one pass at the cap)",
        set.len(),
        single_pass.totals.sphere_tests as f64 / bounded.totals.sphere_tests as f64
    );
}

/// Criterion 5: the per-round count of still-unresolved queries is
/// non-increasing and ends at zero, and the round count respects
/// ceil(log_growth(maxDist / start_radius)) + 1.
#[test]
fn criterion_5_pruning_and_termination() {
    let instances = randomized_instances(50);
    for inst in &instances {
        let config = SearchConfig::new(inst.k).with_seed(inst.search_seed);
        let result = true_knn(&inst.points, &config).unwrap();
        let reference = oracle::exact_knn(&inst.points, inst.k).unwrap();
        let maxd = max_from_lists(&reference);

        let rounds = &result.rounds;
        assert_eq!(rounds.last().unwrap().active_queries, 0, "{}", inst.label);
        for pair in rounds.windows(2) {
            assert!(
                pair[1].active_queries <= pair[0].active_queries,
                "{}: active count grew",
                inst.label
            );
            // Resolved-once conservation: next round's survivors are
            // exactly this round's survivors minus its resolutions.
            assert_eq!(
                pair[1].active_queries,
                pair[0].active_queries - pair[1].resolved_this_round,
                "{}: a resolved query re-entered",
                inst.label
            );
        }
        assert_eq!(
            rounds[0].active_queries,
            inst.points.len() - rounds[0].resolved_this_round,
            "{}",
            inst.label
        );
        for round in &rounds[..rounds.len() - 1] {
            assert!(round.active_queries > 0, "{}: early empty round", inst.label);
        }
        let resolved_total: usize = rounds.iter().map(|r| r.resolved_this_round).sum();
        assert_eq!(resolved_total, inst.points.len(), "{}", inst.label);

        let r0 = rounds[0].radius;
        let bound = if maxd <= r0 {
            1
        } else {
            ((maxd / r0).log2() + 1e-9).ceil() as usize + 1
        };
        assert!(
            rounds.len() <= bound,
            "{}: {} rounds exceeds bound {bound} (maxDist {maxd}, r0 {r0})",
            inst.label,
            rounds.len()
        );
    }
    println!(
        "ACCEPTANCE C5 pruning and termination: PASS ({} instances)",
        instances.len()
    );
}

/// Criterion 6: refitting a tree to a larger radius is equivalent to a
/// fresh rebuild (100 randomized trials) and not slower at 200K points.
#[test]
fn criterion_6_refit_correctness_and_speed() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for trial in 0..100 {
        let n = rng.random_range(2..=2000);
        let set = gen_uniform(n, rng.random());
        let r0 = rng.random_range(0.0..0.2);
        let r1 = r0 * rng.random_range(1.0..16.0);
        let mut refitted = Bvh::build(set.points(), r0, 4).unwrap();
        refitted.refit(r1).unwrap();
        let rebuilt = Bvh::build(set.points(), r1, 4).unwrap();
        assert_eq!(refitted.nodes(), rebuilt.nodes(), "trial {trial}");
        for _ in 0..5 {
            let q = Point3::new(rng.random(), rng.random(), rng.random());
            let mut ca = trueknn::TraversalCounters::new();
            let mut cb = trueknn::TraversalCounters::new();
            let mut va = Vec::new();
            let mut vb = Vec::new();
            refitted.query_point(q, &mut ca, |i, _| va.push(i));
            rebuilt.query_point(q, &mut cb, |i, _| vb.push(i));
            assert_eq!(va, vb, "trial {trial}");
            assert_eq!(ca, cb, "trial {trial}");
        }
    }

    // Timing on 200K synthetic spheres; take the best of three.
    let set = gen_uniform(200_000, 7);
    let (r0, r1) = (0.005, 0.01);
    let mut refit_time = Duration::MAX;
    let mut rebuild_time = Duration::MAX;
    for _ in 0..3 {
        let mut tree = Bvh::build(set.points(), r0, 4).unwrap();
        let t = Instant::now();
        tree.refit(r1).unwrap();
        refit_time = refit_time.min(t.elapsed());

        let t = Instant::now();
        let rebuilt = Bvh::build(set.points(), r1, 4).unwrap();
        rebuild_time = rebuild_time.min(t.elapsed());
        assert_eq!(rebuilt.node_count(), tree.node_count());
    }
    assert!(
        refit_time <= rebuild_time,
        "refit {refit_time:?} slower than rebuild {rebuild_time:?}"
    );
    println!(
        "ACCEPTANCE C6 refit correctness and speed: PASS (100 trials equal; refit {:.2?} vs rebuild {:.2?}, {:.1}% of rebuild time)",
        refit_time,
        rebuild_time,
        100.0 * refit_time.as_secs_f64() / rebuild_time.as_secs_f64()
    );
}

/// Criterion 7: result identity across sampled start radii (hard gate),
/// with the sphere-test spread reported as a soft check.
#[test]
fn criterion_7_start_radius_robustness() {
    let set = pinned_clustered_outliers();
    let k = 5;
    let reference = oracle::exact_knn(&set, k).unwrap();

    let mut counters = Vec::new();
    let mut radii = Vec::new();
    for seed in 0..10u64 {
        let r0 = sample_start_radius(&set, 100, 4, seed).unwrap();
        radii.push(r0);
        let config = SearchConfig::new(k).with_start_radius(r0);
        let result = true_knn(&set, &config).unwrap();
        verify::knn_matches_oracle(&set, &result, &reference, TOL)
            .unwrap_or_else(|m| panic!("start radius {r0}: {m}"));
        counters.push(result.totals.sphere_tests);
    }
    let best = *counters.iter().min().unwrap() as f64;
    let worst = *counters.iter().max().unwrap() as f64;
    let spread = worst / best;
    let soft = if spread < 5.0 { "soft-PASS" } else { "soft-FAIL" };
    println!(
        "ACCEPTANCE C7 start-radius robustness: PASS (10 radii in [{:.5}, {:.5}] all exact; sphere-test spread {spread:.2}x, target < 5x: {soft})",
        radii.iter().cloned().fold(f64::INFINITY, f64::min),
        radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
}

/// Engine-level determinism backing criterion 8 (the byte-identical digest
/// gate itself lives in the CLI acceptance tests).
#[test]
fn criterion_8_engine_determinism() {
    let set = pinned_clustered_outliers();
    let config = SearchConfig::new(5).with_seed(PINNED_SEED);
    let a = true_knn(&set, &config).unwrap();
    let b = true_knn(&set, &config).unwrap();
    assert_eq!(a.neighbors, b.neighbors);
    assert_eq!(a.distances, b.distances);
    assert_eq!(a.totals.sphere_tests, b.totals.sphere_tests);
    assert_eq!(a.totals.aabb_tests, b.totals.aabb_tests);
    assert_eq!(a.rounds.len(), b.rounds.len());
    for (ra, rb) in a.rounds.iter().zip(&b.rounds) {
        assert_eq!(ra.radius, rb.radius);
        assert_eq!(ra.active_queries, rb.active_queries);
        assert_eq!(ra.sphere_tests, rb.sphere_tests);
        assert_eq!(ra.aabb_tests, rb.aabb_tests);
    }
    println!("ACCEPTANCE C8 determinism (engine level): PASS (see CLI acceptance for the digest gate)");
}

/// Criterion 9 has no desk-scale assertion: full-scale figures need RT
/// hardware and the original million-point datasets. The README documents
/// the optional 3DRoad 400K run that checks the round shape.
#[test]
fn criterion_9_full_scale_documented() {
    println!(
        "ACCEPTANCE C9 full-scale figures: DOCUMENTED (not desk-reproducible; covered by C1-C7, optional 3DRoad run in README)"
    );
}
