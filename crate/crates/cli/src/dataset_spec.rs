//! Dataset specifier parsing: `--gen uniform:<n>`,
//! `--gen clustered:<n>[,clusters,spread,outlier_frac]`, and
//! `--csv <path>[:xcol,ycol[,zcol]]`.

use trueknn::dataset::{self, ColumnSelector, CsvColumns, PointSet};

use crate::args::DatasetArgs;
use crate::error::CliError;

pub fn load(args: &DatasetArgs) -> Result<PointSet, CliError> {
    if args.limit == Some(0) {
        return Err(CliError::Usage("--limit must be at least 1".to_string()));
    }
    let set = match (&args.csv, &args.gen) {
        (None, None) => {
            return Err(CliError::Usage(
                "provide a dataset with --csv or --gen".to_string(),
            ))
        }
        (Some(spec), None) => {
            let (path, columns) = parse_csv_spec(spec)?;
            dataset::load_csv(path, columns, args.limit)?
        }
        (None, Some(spec)) => {
            let family = parse_gen_family(spec)?;
            let (family, n) = family.split_size()?;
            let set = family.generate(n, args.seed);
            match args.limit {
                Some(limit) if limit < set.len() => set.truncated(limit),
                _ => set,
            }
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --csv with --gen"),
    };
    Ok(set)
}

/// Splits `<path>[:columns]`; the suffix counts as columns only when it
/// parses as a column list, so paths containing ':' still load.
pub fn parse_csv_spec(spec: &str) -> Result<(&str, Option<CsvColumns>), CliError> {
    if let Some((path, cols)) = spec.rsplit_once(':') {
        if !path.is_empty() {
            if let Some(columns) = try_parse_columns(cols) {
                return Ok((path, Some(columns)));
            }
        }
    }
    Ok((spec, None))
}

fn try_parse_columns(s: &str) -> Option<CsvColumns> {
    let parts: Vec<&str> = s.split(',').collect();
    if !(parts.len() == 2 || parts.len() == 3) {
        return None;
    }
    let mut selectors = Vec::new();
    for part in &parts {
        selectors.push(part.parse::<ColumnSelector>().ok()?);
    }
    let z = if selectors.len() == 3 {
        Some(selectors.pop().unwrap())
    } else {
        None
    };
    let y = selectors.pop().unwrap();
    let x = selectors.pop().unwrap();
    Some(CsvColumns { x, y, z })
}

/// A generator family plus its parameters, size not yet applied.
#[derive(Clone, Debug, PartialEq)]
pub enum GenFamily {
    Uniform { n: Option<usize> },
    Clustered {
        n: Option<usize>,
        clusters: usize,
        spread: f64,
        outlier_fraction: f64,
    },
}

impl GenFamily {
    pub fn label(&self) -> &'static str {
        match self {
            GenFamily::Uniform { .. } => "uniform",
            GenFamily::Clustered { .. } => "clustered",
        }
    }

    fn split_size(self) -> Result<(GenFamily, usize), CliError> {
        let n = match &self {
            GenFamily::Uniform { n } | GenFamily::Clustered { n, .. } => *n,
        };
        let n = n.ok_or_else(|| {
            CliError::Usage("generator spec needs a size, e.g. uniform:1000".to_string())
        })?;
        Ok((self, n))
    }

    pub fn generate(&self, n: usize, seed: u64) -> PointSet {
        match self {
            GenFamily::Uniform { .. } => dataset::gen_uniform(n, seed),
            GenFamily::Clustered {
                clusters,
                spread,
                outlier_fraction,
                ..
            } => dataset::gen_clustered(n, *clusters, *spread, *outlier_fraction, seed),
        }
    }
}

/// Parses `uniform[:n]` / `clustered[:n[,clusters,spread,frac]]`. Sweep
/// dataset tokens reuse this with the size omitted.
pub fn parse_gen_family(spec: &str) -> Result<GenFamily, CliError> {
    let usage = |msg: String| CliError::Usage(msg);
    let (family, params) = match spec.split_once(':') {
        Some((f, p)) => (f, Some(p)),
        None => (spec, None),
    };
    match family {
        "uniform" => {
            let n = params
                .map(|p| {
                    p.parse::<usize>().map_err(|_| {
                        usage(format!("bad size in generator spec '{spec}'"))
                    })
                })
                .transpose()?;
            if n == Some(0) {
                return Err(usage("generator size must be at least 1".to_string()));
            }
            Ok(GenFamily::Uniform { n })
        }
        "clustered" => {
            let mut n = None;
            let mut clusters = 5usize;
            let mut spread = 0.01f64;
            let mut outlier_fraction = 0.001f64;
            if let Some(params) = params {
                let parts: Vec<&str> = params.split(',').collect();
                if parts.len() > 4 {
                    return Err(usage(format!(
                        "too many parameters in generator spec '{spec}'"
                    )));
                }
                n = Some(parts[0].parse::<usize>().map_err(|_| {
                    usage(format!("bad size in generator spec '{spec}'"))
                })?);
                if n == Some(0) {
                    return Err(usage("generator size must be at least 1".to_string()));
                }
                if let Some(c) = parts.get(1) {
                    clusters = c.parse().map_err(|_| {
                        usage(format!("bad cluster count in '{spec}'"))
                    })?;
                    if clusters == 0 {
                        return Err(usage("cluster count must be at least 1".to_string()));
                    }
                }
                if let Some(s) = parts.get(2) {
                    spread = s
                        .parse()
                        .map_err(|_| usage(format!("bad spread in '{spec}'")))?;
                    if !(spread.is_finite() && spread >= 0.0) {
                        return Err(usage("spread must be finite and non-negative".into()));
                    }
                }
                if let Some(f) = parts.get(3) {
                    outlier_fraction = f
                        .parse()
                        .map_err(|_| usage(format!("bad outlier fraction in '{spec}'")))?;
                    if !(0.0..1.0).contains(&outlier_fraction) {
                        return Err(usage("outlier fraction must be in [0, 1)".into()));
                    }
                }
            }
            Ok(GenFamily::Clustered {
                n,
                clusters,
                spread,
                outlier_fraction,
            })
        }
        other => Err(usage(format!(
            "unknown generator family '{other}' (expected uniform or clustered)"
        ))),
    }
}
