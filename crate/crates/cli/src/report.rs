//! Machine-readable run reports. One JSON document per run; the schema is
//! shipped in docs/report_schema.json. Wall times are reported, never
//! asserted; the result digest is the regression anchor.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use trueknn::dataset::PointSet;
use trueknn::search::{KnnResult, RefitMode, SearchConfig, SearchRound};

use crate::error::{data_err, CliError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub dataset: DatasetInfo,
    pub config: ConfigEcho,
    pub rounds: Vec<RoundRecord>,
    pub totals: TotalsRecord,
    pub resolved_queries: usize,
    /// SHA-256 over the sorted neighbor lists, distances, and resolved
    /// flags; identical for identical config + dataset + seed.
    pub result_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationRecord>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DatasetInfo {
    pub source: String,
    pub points: usize,
    pub dimensionality: String,
}

impl DatasetInfo {
    pub fn of(points: &PointSet) -> Self {
        Self {
            source: points.source_name().to_string(),
            points: points.len(),
            dimensionality: points.dimensionality().to_string(),
        }
    }
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub k: usize,
    pub seed: u64,
    pub growth_factor: f64,
    pub leaf_capacity: usize,
    pub refit_mode: String,
    /// As requested on the command line; absent means sampled.
    pub start_radius: Option<f64>,
    /// Radius the first round actually ran at.
    pub resolved_start_radius: f64,
    pub radius_cap: Option<f64>,
    pub max_rounds: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RoundRecord {
    pub round: usize,
    pub radius: f64,
    /// Queries still unresolved after this round.
    pub active_queries: usize,
    pub resolved_this_round: usize,
    pub aabb_tests: u64,
    pub sphere_tests: u64,
    pub elapsed_seconds: f64,
}

impl RoundRecord {
    fn of(round: &SearchRound) -> Self {
        Self {
            round: round.round_index,
            radius: round.radius,
            active_queries: round.active_queries,
            resolved_this_round: round.resolved_this_round,
            aabb_tests: round.aabb_tests,
            sphere_tests: round.sphere_tests,
            elapsed_seconds: round.elapsed.as_secs_f64(),
        }
    }
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct TotalsRecord {
    pub rounds: usize,
    pub aabb_tests: u64,
    pub sphere_tests: u64,
    pub elapsed_seconds: f64,
    pub structure_update_seconds: f64,
    pub final_radius: f64,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct ComparisonRecord {
    pub baseline_radius: f64,
    /// "max_distance" or "percentile:<pct>".
    pub baseline_radius_kind: String,
    pub baseline: BaselineRecord,
    pub ratios: RatioRecord,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct BaselineRecord {
    pub aabb_tests: u64,
    pub sphere_tests: u64,
    pub elapsed_seconds: f64,
    pub resolved_queries: usize,
    pub result_digest: String,
}

/// Baseline value divided by the multi-round value.
#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct RatioRecord {
    pub sphere_tests: f64,
    pub aabb_tests: f64,
    pub elapsed: f64,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct VerificationRecord {
    pub passed: bool,
    /// "live" or "fixture".
    pub mode: String,
}

/// Exact reference results written by the `oracle` subcommand and consumed
/// by `knn --verify-against`.
#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub schema_version: u32,
    pub command: String,
    pub dataset: DatasetInfo,
    pub k: usize,
    pub max_knn_distance: f64,
    pub percentile_99_distance: f64,
    pub neighbors: Vec<Vec<u32>>,
    pub distances: Vec<Vec<f64>>,
}

pub fn config_echo(config: &SearchConfig, result: &KnnResult) -> ConfigEcho {
    ConfigEcho {
        k: config.k,
        seed: config.rng_seed,
        growth_factor: config.growth_factor,
        leaf_capacity: config.leaf_capacity,
        refit_mode: match config.refit_mode {
            RefitMode::Refit => "refit".to_string(),
            RefitMode::Rebuild => "rebuild".to_string(),
        },
        start_radius: config.start_radius,
        resolved_start_radius: result.rounds.first().map_or(0.0, |r| r.radius),
        radius_cap: config.radius_cap,
        max_rounds: config.max_rounds,
    }
}

pub fn run_report(
    command: &str,
    points: &PointSet,
    config: &SearchConfig,
    result: &KnnResult,
) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        dataset: DatasetInfo::of(points),
        config: config_echo(config, result),
        rounds: result.rounds.iter().map(RoundRecord::of).collect(),
        totals: TotalsRecord {
            rounds: result.totals.rounds,
            aabb_tests: result.totals.aabb_tests,
            sphere_tests: result.totals.sphere_tests,
            elapsed_seconds: result.totals.elapsed.as_secs_f64(),
            structure_update_seconds: result.totals.structure_update.as_secs_f64(),
            final_radius: result.final_radius,
        },
        resolved_queries: result.resolved_count(),
        result_digest: result_digest(result),
        comparison: None,
        verification: None,
    }
}

/// SHA-256 over every query's neighbor list, distance bits, and resolved
/// flag, in query order.
pub fn result_digest(result: &KnnResult) -> String {
    let mut hasher = Sha256::new();
    hasher.update((result.neighbors.len() as u64).to_le_bytes());
    for q in 0..result.neighbors.len() {
        hasher.update((result.neighbors[q].len() as u64).to_le_bytes());
        for (&index, &dist) in result.neighbors[q].iter().zip(&result.distances[q]) {
            hasher.update(index.to_le_bytes());
            hasher.update(dist.to_bits().to_le_bytes());
        }
        hasher.update([u8::from(result.resolved[q])]);
    }
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes pretty JSON via a temp file in the target directory, then
/// renames into place.
pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(data_err)?;
    serde_json::to_writer_pretty(&mut tmp, value).map_err(data_err)?;
    tmp.write_all(b"\n").map_err(data_err)?;
    tmp.persist(path)
        .map_err(|e| CliError::Data(format!("failed to write {}: {e}", path.display())))?;
    Ok(())
}

/// Writes to `--out` when given, else pretty-prints to stdout.
pub fn emit<T: Serialize>(out: Option<&Path>, value: &T, summary: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_json_atomic(path, value)?;
            println!("{summary} -> {}", path.display());
        }
        None => {
            let text = serde_json::to_string_pretty(value).map_err(data_err)?;
            println!("{text}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use trueknn::search::true_knn;

    #[test]
    fn digest_is_stable_and_sensitive() {
        let set = trueknn::dataset::gen_uniform(200, 9);
        let config = SearchConfig::new(3).with_seed(4);
        let a = true_knn(&set, &config).unwrap();
        let b = true_knn(&set, &config).unwrap();
        assert_eq!(result_digest(&a), result_digest(&b));

        let other = true_knn(&set, &SearchConfig::new(4).with_seed(4)).unwrap();
        assert_ne!(result_digest(&a), result_digest(&other));
    }

    #[test]
    fn totals_mirror_round_sums() {
        let set = trueknn::dataset::gen_uniform(300, 5);
        let config = SearchConfig::new(3).with_seed(1);
        let result = true_knn(&set, &config).unwrap();
        let report = run_report("knn", &set, &config, &result);
        let sphere: u64 = report.rounds.iter().map(|r| r.sphere_tests).sum();
        let aabb: u64 = report.rounds.iter().map(|r| r.aabb_tests).sum();
        assert_eq!(report.totals.sphere_tests, sphere);
        assert_eq!(report.totals.aabb_tests, aabb);
        assert_eq!(report.totals.rounds, report.rounds.len());
    }
}
