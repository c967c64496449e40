//! Command-line definitions.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "trueknn",
    version,
    about = "Unbounded k-nearest-neighbor search over a sphere BVH, with baselines, oracles, and sweep reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the multi-round search and write a run report.
    Knn(KnnArgs),
    /// Run the fixed-radius baseline and the multi-round search, reporting
    /// both counter sets and their ratios.
    Compare(CompareArgs),
    /// Run a dataset-size sweep: one report per cell plus an aggregate CSV.
    Sweep(SweepArgs),
    /// Compute exact reference results for pinning fixtures.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DatasetArgs {
    /// CSV dataset: <path>[:xcol,ycol[,zcol]] (columns by index or header name)
    #[arg(long, value_name = "SPEC", conflicts_with = "gen")]
    pub csv: Option<String>,

    /// Generated dataset: uniform:<n> or clustered:<n>[,clusters,spread,outlier_frac]
    #[arg(long, value_name = "SPEC")]
    pub gen: Option<String>,

    /// Keep only the first N points
    #[arg(long, value_name = "N")]
    pub limit: Option<usize>,

    /// Seed for generators and start-radius sampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Radius of the first round; sampled from the data when omitted
    #[arg(long, value_name = "R")]
    pub start_radius: Option<f64>,

    /// Radius multiplier between rounds
    #[arg(long, default_value_t = 2.0, value_name = "G")]
    pub growth: f64,

    /// Primitives per BVH leaf
    #[arg(long, default_value_t = 4, value_name = "C")]
    pub leaf_capacity: usize,

    /// Abort after this many rounds
    #[arg(long, value_name = "M")]
    pub max_rounds: Option<usize>,

    /// Tree update strategy between rounds
    #[arg(long, value_enum, default_value_t = RefitModeArg::Refit)]
    pub refit_mode: RefitModeArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefitModeArg {
    Refit,
    Rebuild,
}

#[derive(Args, Debug)]
pub struct KnnArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,

    /// Neighbor count: an integer or "sqrt" for floor(sqrt(n))
    #[arg(long, value_name = "K")]
    pub k: KSpec,

    #[command(flatten)]
    pub search: SearchArgs,

    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Compare the result against a freshly computed oracle; any mismatch
    /// is a verification failure (exit 3)
    #[arg(long)]
    pub verify: bool,

    /// Compare against a fixture written by `oracle` instead
    #[arg(long, value_name = "PATH", conflicts_with = "verify")]
    pub verify_against: Option<PathBuf>,

    /// Refuse live verification above this many points
    #[arg(long, default_value_t = 20_000, value_name = "N")]
    pub oracle_cap: usize,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,

    /// Neighbor count: an integer or "sqrt" for floor(sqrt(n))
    #[arg(long, value_name = "K")]
    pub k: KSpec,

    /// Cap both searches at this percentile of k-th neighbor distances
    /// instead of running the baseline at the maximum
    #[arg(long, value_name = "PCT")]
    pub percentile: Option<f64>,

    #[command(flatten)]
    pub search: SearchArgs,

    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Refuse oracle radius computation above this many points
    #[arg(long, default_value_t = 20_000, value_name = "N")]
    pub oracle_cap: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Comma-separated dataset sizes, e.g. 1000,2000,4000
    #[arg(long, value_name = "LIST")]
    pub sizes: String,

    /// Comma-separated dataset families: uniform,
    /// clustered[:clusters,spread,outlier_frac], or csv:<path>[:cols]
    #[arg(long, value_name = "LIST")]
    pub datasets: String,

    /// Neighbor count per cell: an integer or "sqrt"
    #[arg(long, value_name = "K", default_value = "5")]
    pub k_mode: KSpec,

    #[command(flatten)]
    pub search: SearchArgs,

    /// Seed for generators and start-radius sampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Directory for per-cell reports, aggregate.csv, and summary.json
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Refuse oracle radius computation above this many points
    #[arg(long, default_value_t = 20_000, value_name = "N")]
    pub oracle_cap: usize,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub dataset: DatasetArgs,

    /// Neighbor count: an integer or "sqrt" for floor(sqrt(n))
    #[arg(long, value_name = "K")]
    pub k: KSpec,

    /// Refuse datasets above this many points
    #[arg(long, default_value_t = 20_000, value_name = "N")]
    pub cap: usize,

    /// Write the JSON fixture here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// A neighbor count given either literally or as floor(sqrt(n)).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KSpec {
    Fixed(usize),
    Sqrt,
}

impl KSpec {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            KSpec::Fixed(k) => k,
            KSpec::Sqrt => isqrt_floor(n),
        }
    }
}

impl FromStr for KSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("sqrt") {
            return Ok(KSpec::Sqrt);
        }
        let k: usize = s
            .parse()
            .map_err(|_| format!("expected a positive integer or \"sqrt\", got '{s}'"))?;
        if k == 0 {
            return Err("k must be at least 1".to_string());
        }
        Ok(KSpec::Fixed(k))
    }
}

pub fn isqrt_floor(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    while k > 0 && k * k > n {
        k -= 1;
    }
    k
}
