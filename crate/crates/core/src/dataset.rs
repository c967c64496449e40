//! Dataset loading, validation, and synthetic generators.
//!
//! CSV files are comma-delimited; a header row is detected by a non-numeric
//! first row and columns can be picked by index or by header name. 2-column
//! inputs are lifted to 3D with `z = 0`. Coordinates are used in native
//! units with no normalization.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Error;
use crate::geom::Point3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimensionality {
    TwoD,
    ThreeD,
}

impl fmt::Display for Dimensionality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimensionality::TwoD => write!(f, "2d"),
            Dimensionality::ThreeD => write!(f, "3d"),
        }
    }
}

/// An indexed, validated collection of points: non-empty, every coordinate
/// finite, and `z = 0` throughout when tagged 2D.
#[derive(Clone, Debug)]
pub struct PointSet {
    points: Vec<Point3>,
    dimensionality: Dimensionality,
    source: String,
}

impl PointSet {
    pub fn new(
        points: Vec<Point3>,
        dimensionality: Dimensionality,
        source: impl Into<String>,
    ) -> Result<Self, Error> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (index, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinitePoint { index });
            }
            if dimensionality == Dimensionality::TwoD && p.z != 0.0 {
                return Err(Error::NonZeroZIn2d { index });
            }
        }
        Ok(Self {
            points,
            dimensionality,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn get(&self, index: usize) -> Point3 {
        self.points[index]
    }

    pub fn dimensionality(&self) -> Dimensionality {
        self.dimensionality
    }

    pub fn source_name(&self) -> &str {
        &self.source
    }

    /// The first `limit` points as a new set with the same tag and label.
    pub fn truncated(&self, limit: usize) -> PointSet {
        assert!(limit >= 1, "a point set cannot be empty");
        PointSet {
            points: self.points[..limit.min(self.points.len())].to_vec(),
            dimensionality: self.dimensionality,
            source: self.source.clone(),
        }
    }
}

/// Picks a CSV column by zero-based index or by header name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "{}", i + 1),
            ColumnSelector::Name(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for ColumnSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty column selector".to_string());
        }
        if s.bytes().all(|b| b.is_ascii_digit()) {
            Ok(ColumnSelector::Index(
                s.parse().map_err(|e| format!("bad column index: {e}"))?,
            ))
        } else {
            Ok(ColumnSelector::Name(s.to_string()))
        }
    }
}

/// Which columns hold x, y, and (optionally) z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvColumns {
    pub x: ColumnSelector,
    pub y: ColumnSelector,
    pub z: Option<ColumnSelector>,
}

impl CsvColumns {
    pub fn by_index(x: usize, y: usize, z: Option<usize>) -> Self {
        Self {
            x: ColumnSelector::Index(x),
            y: ColumnSelector::Index(y),
            z: z.map(ColumnSelector::Index),
        }
    }
}

/// Loads points from a delimited text file.
///
/// With `columns = None` the layout is inferred from the first row: two
/// fields load as (x, y), three or more as (x, y, z). Rows after the first
/// `limit` valid ones are never read. Any unparsable, missing, or
/// non-finite field is an error naming the file row and column.
pub fn load_csv(
    path: impl AsRef<Path>,
    columns: Option<CsvColumns>,
    limit: Option<usize>,
) -> Result<PointSet, Error> {
    let path = path.as_ref();
    let label = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = reader.records();
    let first = match records.next() {
        Some(rec) => rec.map_err(|e| csv_file_err(&label, e))?,
        None => {
            return Err(Error::CsvFile {
                path: label,
                reason: "no data rows".to_string(),
            })
        }
    };

    let needs_header = columns.as_ref().is_some_and(|c| {
        matches!(c.x, ColumnSelector::Name(_))
            || matches!(c.y, ColumnSelector::Name(_))
            || matches!(c.z, Some(ColumnSelector::Name(_)))
    });
    let columns = match columns {
        Some(c) => c,
        None => CsvColumns::by_index(0, 1, if first.len() >= 3 { Some(2) } else { None }),
    };

    // Resolve every selector to a field index. A header row is consumed
    // when a name selector requires one, or when none of the selected
    // fields in the first row is numeric. A first row with some numeric
    // fields is data, so a stray non-numeric field in it is a field error,
    // not a header.
    let mut first_is_data = false;
    let resolved = if needs_header {
        ResolvedColumns::from_header(&label, &columns, &first)?
    } else {
        let by_index = ResolvedColumns::from_indices(&columns);
        if by_index.looks_like_header(&first) {
            ResolvedColumns::from_header(&label, &columns, &first)?
        } else {
            first_is_data = true;
            by_index
        }
    };

    let mut points = Vec::new();
    let limit = limit.unwrap_or(usize::MAX);
    if limit == 0 {
        return Err(Error::CsvFile {
            path: label,
            reason: "limit of 0 leaves no rows".to_string(),
        });
    }

    if first_is_data {
        points.push(resolved.parse_row(&label, &first, 1)?);
    }
    while points.len() < limit {
        let record = match records.next() {
            Some(rec) => rec.map_err(|e| csv_file_err(&label, e))?,
            None => break,
        };
        if record.len() == 1 && record[0].is_empty() {
            continue; // blank line
        }
        let row = record.position().map_or(0, |p| p.line());
        points.push(resolved.parse_row(&label, &record, row)?);
    }

    if points.is_empty() {
        return Err(Error::CsvFile {
            path: label,
            reason: "no data rows".to_string(),
        });
    }
    let dim = if resolved.z.is_some() {
        Dimensionality::ThreeD
    } else {
        Dimensionality::TwoD
    };
    PointSet::new(points, dim, label)
}

struct ResolvedColumns {
    x: (usize, ColumnSelector),
    y: (usize, ColumnSelector),
    z: Option<(usize, ColumnSelector)>,
}

impl ResolvedColumns {
    fn from_indices(columns: &CsvColumns) -> Self {
        let pick = |sel: &ColumnSelector| match sel {
            ColumnSelector::Index(i) => (*i, sel.clone()),
            ColumnSelector::Name(_) => unreachable!("name selectors need a header"),
        };
        Self {
            x: pick(&columns.x),
            y: pick(&columns.y),
            z: columns.z.as_ref().map(pick),
        }
    }

    fn from_header(
        label: &str,
        columns: &CsvColumns,
        header: &csv::StringRecord,
    ) -> Result<Self, Error> {
        let pick = |sel: &ColumnSelector| -> Result<(usize, ColumnSelector), Error> {
            match sel {
                ColumnSelector::Index(i) => Ok((*i, sel.clone())),
                ColumnSelector::Name(name) => header
                    .iter()
                    .position(|h| h == name)
                    .map(|i| (i, sel.clone()))
                    .ok_or_else(|| Error::CsvFile {
                        path: label.to_string(),
                        reason: format!("column '{name}' not found in header"),
                    }),
            }
        };
        Ok(Self {
            x: pick(&columns.x)?,
            y: pick(&columns.y)?,
            z: columns.z.as_ref().map(pick).transpose()?,
        })
    }

    /// No selected field is numeric.
    fn looks_like_header(&self, record: &csv::StringRecord) -> bool {
        let numeric = |&(i, _): &(usize, ColumnSelector)| {
            record.get(i).is_some_and(|f| f.parse::<f64>().is_ok())
        };
        !(numeric(&self.x) || numeric(&self.y) || self.z.as_ref().is_some_and(numeric))
    }

    fn parse_row(
        &self,
        label: &str,
        record: &csv::StringRecord,
        row: u64,
    ) -> Result<Point3, Error> {
        let field = |(index, sel): &(usize, ColumnSelector)| -> Result<f64, Error> {
            let err = |reason: String| Error::CsvField {
                path: label.to_string(),
                row,
                column: sel.to_string(),
                reason,
            };
            let raw = record
                .get(*index)
                .ok_or_else(|| err("missing field".to_string()))?;
            let value: f64 = raw
                .parse()
                .map_err(|_| err(format!("not a number: '{raw}'")))?;
            if !value.is_finite() {
                return Err(err(format!("non-finite value: '{raw}'")));
            }
            Ok(value)
        };
        let x = field(&self.x)?;
        let y = field(&self.y)?;
        let z = match &self.z {
            Some(sel) => field(sel)?,
            None => 0.0,
        };
        Ok(Point3::new(x, y, z))
    }
}

fn csv_file_err(label: &str, e: csv::Error) -> Error {
    Error::CsvFile {
        path: label.to_string(),
        reason: e.to_string(),
    }
}

/// `n` points with i.i.d. uniform coordinates on [0, 1], deterministic per
/// seed.
pub fn gen_uniform(n: usize, seed: u64) -> PointSet {
    assert!(n >= 1, "need at least one point");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
        .collect();
    PointSet {
        points,
        dimensionality: Dimensionality::ThreeD,
        source: format!("uniform:{n}"),
    }
}

/// Gaussian blobs around uniformly placed centers in the unit cube, plus a
/// fraction of outliers spread over a region 10x that cube, centered on it.
/// Deterministic per seed.
pub fn gen_clustered(
    n: usize,
    cluster_count: usize,
    cluster_spread: f64,
    outlier_fraction: f64,
    seed: u64,
) -> PointSet {
    assert!(n >= 1, "need at least one point");
    assert!(cluster_count >= 1, "need at least one cluster");
    assert!(
        cluster_spread.is_finite() && cluster_spread >= 0.0,
        "cluster spread must be a finite non-negative value"
    );
    assert!(
        (0.0..1.0).contains(&outlier_fraction),
        "outlier fraction must be in [0, 1)"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outliers = ((outlier_fraction * n as f64).round() as usize).min(n - 1);
    let centers: Vec<Point3> = (0..cluster_count)
        .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
        .collect();
    let normal = Normal::new(0.0, cluster_spread).expect("spread validated above");

    let mut points = Vec::with_capacity(n);
    for _ in 0..n - outliers {
        let c = centers[rng.random_range(0..cluster_count)];
        points.push(Point3::new(
            c.x + normal.sample(&mut rng),
            c.y + normal.sample(&mut rng),
            c.z + normal.sample(&mut rng),
        ));
    }
    for _ in 0..outliers {
        points.push(Point3::new(
            rng.random_range(-4.5..5.5),
            rng.random_range(-4.5..5.5),
            rng.random_range(-4.5..5.5),
        ));
    }
    PointSet {
        points,
        dimensionality: Dimensionality::ThreeD,
        source: format!("clustered:{n}"),
    }
}
