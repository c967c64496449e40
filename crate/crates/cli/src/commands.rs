//! Subcommand implementations.

use std::path::{Path, PathBuf};

use trueknn::dataset::PointSet;
use trueknn::oracle::{self, ExactKnn};
use trueknn::search::{
    baseline_fixed_radius, true_knn, true_knn_bounded, RefitMode, SearchConfig,
};
use trueknn::verify;

use crate::args::{
    CompareArgs, KSpec, KnnArgs, OracleArgs, RefitModeArg, SearchArgs, SweepArgs,
};
use crate::dataset_spec::{self, parse_csv_spec, parse_gen_family, GenFamily};
use crate::error::{data_err, CliError};
use crate::report::{
    self, BaselineRecord, ComparisonRecord, DatasetInfo, OracleReport, RatioRecord, RunReport,
    VerificationRecord, SCHEMA_VERSION,
};

const VERIFY_TOLERANCE: f64 = 1e-9;

fn build_config(k: usize, search: &SearchArgs, seed: u64) -> Result<SearchConfig, CliError> {
    let mut config = SearchConfig::new(k).with_seed(seed);
    config.start_radius = search.start_radius;
    config.growth_factor = search.growth;
    config.leaf_capacity = search.leaf_capacity;
    config.max_rounds = search.max_rounds;
    config.refit_mode = match search.refit_mode {
        RefitModeArg::Refit => RefitMode::Refit,
        RefitModeArg::Rebuild => RefitMode::Rebuild,
    };
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn resolve_k(spec: KSpec, points: &PointSet) -> Result<usize, CliError> {
    let k = spec.resolve(points.len());
    if points.len() <= k {
        return Err(CliError::Data(format!(
            "dataset has {} points; k = {k} needs at least {}",
            points.len(),
            k + 1
        )));
    }
    Ok(k)
}

fn check_oracle_cap(points: &PointSet, cap: usize, what: &str) -> Result<(), CliError> {
    if points.len() > cap {
        return Err(CliError::Data(format!(
            "dataset has {} points, above the {what} cap of {cap}; raise the cap flag to allow the O(n^2) scan",
            points.len()
        )));
    }
    Ok(())
}

pub fn cmd_knn(args: KnnArgs) -> Result<(), CliError> {
    let points = dataset_spec::load(&args.dataset)?;
    let k = resolve_k(args.k, &points)?;
    let config = build_config(k, &args.search, args.dataset.seed)?;
    let result = true_knn(&points, &config)?;
    let mut report = report::run_report("knn", &points, &config, &result);

    let mut failure: Option<String> = None;
    if args.verify || args.verify_against.is_some() {
        let (reference, mode) = match &args.verify_against {
            Some(path) => (load_fixture(path, &points, k)?, "fixture"),
            None => {
                check_oracle_cap(&points, args.oracle_cap, "verification")?;
                (oracle::exact_knn(&points, k)?, "live")
            }
        };
        let outcome = verify::knn_matches_oracle(&points, &result, &reference, VERIFY_TOLERANCE);
        report.verification = Some(VerificationRecord {
            passed: outcome.is_ok(),
            mode: mode.to_string(),
        });
        if let Err(mismatch) = outcome {
            failure = Some(mismatch.to_string());
        }
    }

    let summary = format!(
        "knn: {} queries, {} rounds, {} sphere tests, digest {}",
        points.len(),
        report.totals.rounds,
        report.totals.sphere_tests,
        &report.result_digest[..12]
    );
    report::emit(args.out.as_deref(), &report, &summary)?;
    match failure {
        Some(reason) => Err(CliError::Verification(reason)),
        None => Ok(()),
    }
}

fn load_fixture(path: &Path, points: &PointSet, k: usize) -> Result<ExactKnn, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("failed to read {}: {e}", path.display())))?;
    let fixture: OracleReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{} is not an oracle fixture: {e}", path.display())))?;
    if fixture.k != k {
        return Err(CliError::Data(format!(
            "fixture {} was computed for k = {}, this run uses k = {k}",
            path.display(),
            fixture.k
        )));
    }
    let here = DatasetInfo::of(points);
    if fixture.dataset != here {
        return Err(CliError::Data(format!(
            "fixture {} describes dataset {:?}, this run loaded {:?}",
            path.display(),
            fixture.dataset,
            here
        )));
    }
    Ok(ExactKnn {
        k: fixture.k,
        neighbors: fixture.neighbors,
        distances: fixture.distances,
    })
}

/// Shared by `compare` and each sweep cell.
struct CompareOutcome {
    report: RunReport,
    sphere_ratio: f64,
}

fn run_compare(
    command: &str,
    points: &PointSet,
    k: usize,
    search: &SearchArgs,
    seed: u64,
    percentile: Option<f64>,
) -> Result<CompareOutcome, CliError> {
    let (baseline_radius, kind) = match percentile {
        Some(pct) => (
            oracle::percentile_knn_distance(points, k, pct)?,
            format!("percentile:{pct}"),
        ),
        None => (oracle::max_knn_distance(points, k)?, "max_distance".to_string()),
    };

    let baseline = baseline_fixed_radius(points, k, baseline_radius, search.leaf_capacity)?;

    let mut config = build_config(k, search, seed)?;
    let result = if percentile.is_some() {
        config.radius_cap = Some(baseline_radius);
        true_knn_bounded(points, &config)?
    } else {
        true_knn(points, &config)?
    };

    let ratio = |b: u64, t: u64| b as f64 / t as f64;
    let sphere_ratio = ratio(baseline.totals.sphere_tests, result.totals.sphere_tests);
    let mut report = report::run_report(command, points, &config, &result);
    report.comparison = Some(ComparisonRecord {
        baseline_radius,
        baseline_radius_kind: kind,
        baseline: BaselineRecord {
            aabb_tests: baseline.totals.aabb_tests,
            sphere_tests: baseline.totals.sphere_tests,
            elapsed_seconds: baseline.totals.elapsed.as_secs_f64(),
            resolved_queries: baseline.resolved_count(),
            result_digest: report::result_digest(&baseline),
        },
        ratios: RatioRecord {
            sphere_tests: sphere_ratio,
            aabb_tests: ratio(baseline.totals.aabb_tests, result.totals.aabb_tests),
            elapsed: baseline.totals.elapsed.as_secs_f64()
                / result.totals.elapsed.as_secs_f64(),
        },
    });
    Ok(CompareOutcome {
        report,
        sphere_ratio,
    })
}

pub fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    if let Some(pct) = args.percentile {
        if !(pct > 0.0 && pct <= 100.0) {
            return Err(CliError::Usage(format!(
                "percentile must be in (0, 100], got {pct}"
            )));
        }
    }
    let points = dataset_spec::load(&args.dataset)?;
    let k = resolve_k(args.k, &points)?;
    check_oracle_cap(&points, args.oracle_cap, "baseline-radius")?;
    let outcome = run_compare(
        "compare",
        &points,
        k,
        &args.search,
        args.dataset.seed,
        args.percentile,
    )?;
    let summary = format!(
        "compare: sphere-test ratio {:.2}x (baseline radius {})",
        outcome.sphere_ratio,
        outcome
            .report
            .comparison
            .as_ref()
            .map(|c| c.baseline_radius)
            .unwrap_or(f64::NAN),
    );
    report::emit(args.out.as_deref(), &outcome.report, &summary)
}

#[derive(serde::Serialize)]
struct SweepRow {
    dataset: String,
    size: usize,
    k: usize,
    rounds: usize,
    final_radius: f64,
    trueknn_sphere_tests: u64,
    trueknn_aabb_tests: u64,
    trueknn_seconds: f64,
    baseline_sphere_tests: u64,
    baseline_aabb_tests: u64,
    baseline_seconds: f64,
    sphere_test_ratio: f64,
}

#[derive(serde::Serialize)]
struct SweepSummary {
    schema_version: u32,
    cells_total: usize,
    cells_failed: usize,
    failures: Vec<SweepFailure>,
    trends: Vec<SweepTrend>,
}

#[derive(serde::Serialize)]
struct SweepFailure {
    cell: String,
    error: String,
}

/// Reported, not asserted: whether the baseline/multi-round sphere-test
/// ratio grows (or holds) as the dataset grows.
#[derive(serde::Serialize)]
struct SweepTrend {
    dataset: String,
    sphere_ratio_non_decreasing: bool,
    ratios: Vec<f64>,
}

enum SweepDataset {
    Generated(GenFamily),
    Csv { path: String, columns: Option<trueknn::dataset::CsvColumns>, label: String },
}

impl SweepDataset {
    fn label(&self) -> String {
        match self {
            SweepDataset::Generated(f) => f.label().to_string(),
            SweepDataset::Csv { label, .. } => label.clone(),
        }
    }

    fn realize(&self, size: usize, seed: u64) -> Result<PointSet, CliError> {
        match self {
            SweepDataset::Generated(family) => Ok(family.generate(size, seed)),
            SweepDataset::Csv { path, columns, .. } => {
                Ok(trueknn::dataset::load_csv(path, columns.clone(), Some(size))?)
            }
        }
    }
}

fn parse_sweep_datasets(list: &str) -> Result<Vec<SweepDataset>, CliError> {
    let mut out = Vec::new();
    for token in list.split(',').map(str::trim) {
        if token.is_empty() {
            continue;
        }
        if let Some(rest) = token.strip_prefix("csv:") {
            let (path, columns) = parse_csv_spec(rest)?;
            let label = Path::new(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "csv".to_string());
            out.push(SweepDataset::Csv {
                path: path.to_string(),
                columns,
                label,
            });
        } else {
            out.push(SweepDataset::Generated(parse_gen_family(token)?));
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(
            "--datasets needs at least one entry".to_string(),
        ));
    }
    Ok(out)
}

fn parse_sizes(list: &str) -> Result<Vec<usize>, CliError> {
    let mut sizes = Vec::new();
    for token in list.split(',').map(str::trim) {
        if token.is_empty() {
            continue;
        }
        let n: usize = token
            .parse()
            .map_err(|_| CliError::Usage(format!("bad size '{token}' in --sizes")))?;
        if n == 0 {
            return Err(CliError::Usage("sizes must be at least 1".to_string()));
        }
        sizes.push(n);
    }
    if sizes.is_empty() {
        return Err(CliError::Usage(
            "--sizes needs at least one entry".to_string(),
        ));
    }
    Ok(sizes)
}

pub fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let sizes = parse_sizes(&args.sizes)?;
    let datasets = parse_sweep_datasets(&args.datasets)?;
    std::fs::create_dir_all(&args.out).map_err(data_err)?;

    let mut rows: Vec<SweepRow> = Vec::new();
    let mut failures: Vec<SweepFailure> = Vec::new();
    let mut trends: Vec<SweepTrend> = Vec::new();

    for dataset in &datasets {
        let mut ratios = Vec::new();
        for &size in &sizes {
            let cell = format!("{}_{}", dataset.label(), size);
            let outcome = dataset.realize(size, args.seed).and_then(|points| {
                check_oracle_cap(&points, args.oracle_cap, "baseline-radius")?;
                let k = resolve_k(args.k_mode, &points)?;
                let outcome =
                    run_compare("sweep-cell", &points, k, &args.search, args.seed, None)?;
                let path: PathBuf = args.out.join(format!("{cell}.json"));
                report::write_json_atomic(&path, &outcome.report)?;
                Ok(outcome)
            });
            match outcome {
                Ok(outcome) => {
                    let r = &outcome.report;
                    let c = r.comparison.as_ref().expect("compare cell has baseline");
                    ratios.push(outcome.sphere_ratio);
                    rows.push(SweepRow {
                        dataset: dataset.label(),
                        size,
                        k: r.config.k,
                        rounds: r.totals.rounds,
                        final_radius: r.totals.final_radius,
                        trueknn_sphere_tests: r.totals.sphere_tests,
                        trueknn_aabb_tests: r.totals.aabb_tests,
                        trueknn_seconds: r.totals.elapsed_seconds,
                        baseline_sphere_tests: c.baseline.sphere_tests,
                        baseline_aabb_tests: c.baseline.aabb_tests,
                        baseline_seconds: c.baseline.elapsed_seconds,
                        sphere_test_ratio: outcome.sphere_ratio,
                    });
                    println!(
                        "cell {cell}: k={} ratio {:.2}x rounds {}",
                        r.config.k, outcome.sphere_ratio, r.totals.rounds
                    );
                }
                Err(err) => {
                    eprintln!("cell {cell}: {err}");
                    failures.push(SweepFailure {
                        cell,
                        error: err.to_string(),
                    });
                }
            }
        }
        trends.push(SweepTrend {
            dataset: dataset.label(),
            sphere_ratio_non_decreasing: ratios.windows(2).all(|w| w[1] >= w[0]),
            ratios,
        });
    }

    let aggregate = args.out.join("aggregate.csv");
    let mut writer = csv::Writer::from_path(&aggregate).map_err(data_err)?;
    for row in &rows {
        writer.serialize(row).map_err(data_err)?;
    }
    writer.flush().map_err(data_err)?;

    let summary = SweepSummary {
        schema_version: SCHEMA_VERSION,
        cells_total: sizes.len() * datasets.len(),
        cells_failed: failures.len(),
        failures,
        trends,
    };
    report::write_json_atomic(&args.out.join("summary.json"), &summary)?;
    println!(
        "sweep: {} cells, {} failed, aggregate {}",
        summary.cells_total,
        summary.cells_failed,
        aggregate.display()
    );
    if summary.cells_failed > 0 {
        return Err(CliError::Data(format!(
            "{} sweep cell(s) failed",
            summary.cells_failed
        )));
    }
    Ok(())
}

pub fn cmd_oracle(args: OracleArgs) -> Result<(), CliError> {
    let points = dataset_spec::load(&args.dataset)?;
    check_oracle_cap(&points, args.cap, "oracle")?;
    let k = resolve_k(args.k, &points)?;
    let exact = oracle::exact_knn(&points, k)?;
    let kth: Vec<f64> = exact
        .distances
        .iter()
        .map(|d| *d.last().expect("k >= 1"))
        .collect();
    let max_knn_distance = kth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let percentile_99_distance = oracle::nearest_rank(&kth, 99.0);

    let fixture = OracleReport {
        schema_version: SCHEMA_VERSION,
        command: "oracle".to_string(),
        dataset: DatasetInfo::of(&points),
        k,
        max_knn_distance,
        percentile_99_distance,
        neighbors: exact.neighbors,
        distances: exact.distances,
    };
    let summary = format!(
        "oracle: {} queries, k={k}, maxDist {max_knn_distance}, p99 {percentile_99_distance}",
        points.len()
    );
    report::emit(args.out.as_deref(), &fixture, &summary)
}
