//! Tabular regression datasets: loading, validation, splitting and a
//! synthetic generator.

mod synthetic;

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use synthetic::{generate_synthetic, SyntheticDataset, SyntheticSpec};

/// What to do with rows holding a missing, non-numeric or non-finite cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropPolicy {
    Reject,
    #[default]
    DropRow,
}

impl std::str::FromStr for DropPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reject" => Ok(Self::Reject),
            "drop-row" => Ok(Self::DropRow),
            other => Err(Error::InvalidParameter(format!(
                "unknown drop policy `{other}` (expected reject or drop-row)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub target_column: String,
    pub drop_policy: DropPolicy,
    /// Column holding non-negative integer row ids. Without it rows are
    /// numbered 0.. in load order.
    pub id_column: Option<String>,
}

impl LoadOptions {
    pub fn new(target_column: impl Into<String>) -> Self {
        Self {
            target_column: target_column.into(),
            drop_policy: DropPolicy::default(),
            id_column: None,
        }
    }
}

/// A numeric feature matrix with its regression target.
///
/// Immutable after construction; all invariants (rectangular, finite,
/// unique non-empty names, unique ids) are checked in [`Dataset::new`].
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    target_name: String,
    rows: Vec<Vec<f64>>,
    target: Vec<f64>,
    row_ids: Vec<u64>,
    position: HashMap<u64, usize>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        target: Vec<f64>,
        row_ids: Vec<u64>,
    ) -> Result<Self> {
        let target_name = target_name.into();
        let mut seen = HashSet::new();
        for name in feature_names.iter().chain(std::iter::once(&target_name)) {
            if name.trim().is_empty() {
                return Err(Error::InvalidDataset("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate column `{name}`")));
            }
        }
        if rows.len() != target.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: target.len(),
            });
        }
        if rows.len() != row_ids.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: row_ids.len(),
            });
        }
        for row in &rows {
            if row.len() != feature_names.len() {
                return Err(Error::DimensionMismatch {
                    expected: feature_names.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut position = HashMap::with_capacity(row_ids.len());
        for (i, &id) in row_ids.iter().enumerate() {
            if position.insert(id, i).is_some() {
                return Err(Error::DuplicateRowId(id));
            }
        }
        Ok(Self {
            feature_names,
            target_name,
            rows,
            target,
            row_ids,
            position,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Index of the row carrying `id`.
    pub fn position(&self, id: u64) -> Option<usize> {
        self.position.get(&id).copied()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows at the given positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        Self::new(
            self.feature_names.clone(),
            self.target_name.clone(),
            positions.iter().map(|&i| self.rows[i].clone()).collect(),
            positions.iter().map(|&i| self.target[i]).collect(),
            positions.iter().map(|&i| self.row_ids[i]).collect(),
        )
    }

    /// The same rows without feature `j`.
    pub fn drop_feature(&self, j: usize) -> Result<Self> {
        let mut names = self.feature_names.clone();
        names.remove(j);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.remove(j);
                r
            })
            .collect();
        Self::new(
            names,
            self.target_name.clone(),
            rows,
            self.target.clone(),
            self.row_ids.clone(),
        )
    }

    /// Write as CSV: optional id column, features in order, then the target.
    /// Values use the shortest representation that parses back exactly.
    pub fn write_csv(&self, path: impl AsRef<Path>, id_column: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut header: Vec<&str> = Vec::with_capacity(self.n_features() + 2);
        header.extend(id_column);
        header.extend(self.feature_names.iter().map(String::as_str));
        header.push(&self.target_name);
        let io = |e| Error::io(path, e);
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for ((row, t), id) in self.rows.iter().zip(&self.target).zip(&self.row_ids) {
            let mut line = String::new();
            if id_column.is_some() {
                line.push_str(&id.to_string());
                line.push(',');
            }
            for v in row {
                line.push_str(&v.to_string());
                line.push(',');
            }
            line.push_str(&t.to_string());
            writeln!(out, "{line}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Train/test partition sharing one feature layout.
#[derive(Clone, Debug)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Load a headed, comma-separated file. Every column other than the target
/// (and the id column, if configured) becomes a feature, in header order.
pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let target_idx = headers
        .iter()
        .position(|h| *h == opts.target_column)
        .ok_or_else(|| Error::MissingColumn(opts.target_column.clone()))?;
    let id_idx = match &opts.id_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?,
        ),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != target_idx && Some(i) != id_idx)
        .collect();
    let feature_names = feature_cols.iter().map(|&i| headers[i].clone()).collect();

    let mut rows = Vec::new();
    let mut target = Vec::new();
    let mut row_ids = Vec::new();
    'records: for (line, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(feature_cols.len());
        for &c in feature_cols.iter().chain(std::iter::once(&target_idx)) {
            let cell = record.get(c).unwrap_or("");
            match parse_cell(cell) {
                Some(v) => row.push(v),
                None if opts.drop_policy == DropPolicy::DropRow => continue 'records,
                None => {
                    return Err(Error::NonNumeric {
                        column: headers[c].clone(),
                        value: cell.to_string(),
                        line: line + 1,
                    })
                }
            }
        }
        let id = match id_idx {
            Some(c) => {
                let cell = record.get(c).unwrap_or("");
                match cell.trim().parse::<u64>() {
                    Ok(id) => id,
                    Err(_) if opts.drop_policy == DropPolicy::DropRow => continue,
                    Err(_) => {
                        return Err(Error::NonNumeric {
                            column: headers[c].clone(),
                            value: cell.to_string(),
                            line: line + 1,
                        })
                    }
                }
            }
            None => rows.len() as u64,
        };
        target.push(row.pop().expect("target cell pushed last"));
        rows.push(row);
        row_ids.push(id);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(
        feature_names,
        headers[target_idx].clone(),
        rows,
        target,
        row_ids,
    )
}

/// Rows with `column < threshold` train, the rest test. The split column is
/// removed from both sides unless `keep_column` is set.
pub fn split_by_column_threshold(
    ds: &Dataset,
    column: &str,
    threshold: f64,
    keep_column: bool,
) -> Result<SplitDataset> {
    let j = ds
        .feature_index(column)
        .ok_or_else(|| Error::MissingColumn(column.to_string()))?;
    let (train_pos, test_pos): (Vec<usize>, Vec<usize>) =
        (0..ds.n_rows()).partition(|&i| ds.row(i)[j] < threshold);
    let empty = |side| Error::EmptySplit {
        column: column.to_string(),
        threshold,
        side,
    };
    if train_pos.is_empty() {
        return Err(empty("training"));
    }
    if test_pos.is_empty() {
        return Err(empty("test"));
    }
    let mut train = ds.select(&train_pos)?;
    let mut test = ds.select(&test_pos)?;
    if !keep_column {
        train = train.drop_feature(j)?;
        test = test.drop_feature(j)?;
    }
    Ok(SplitDataset { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn loads_header_and_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,b,sales\n1,2,3\n4,5,6\n7,8,9\n");
        let ds = load_csv(&p, &LoadOptions::new("sales")).unwrap();
        assert_eq!(ds.feature_names(), ["a", "b"]);
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.target(), [3.0, 6.0, 9.0]);
        assert_eq!(ds.row(1), [4.0, 5.0]);
        assert_eq!(ds.row_ids(), [0, 1, 2]);
    }

    #[test]
    fn target_in_the_middle() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,sales,b\n1,2,3\n");
        let ds = load_csv(&p, &LoadOptions::new("sales")).unwrap();
        assert_eq!(ds.feature_names(), ["a", "b"]);
        assert_eq!(ds.row(0), [1.0, 3.0]);
        assert_eq!(ds.target(), [2.0]);
    }

    #[test]
    fn blank_cell_drops_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,b,sales\n1,2,3\n4,,6\n7,8,9\n");
        let ds = load_csv(&p, &LoadOptions::new("sales")).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.row(1), [7.0, 8.0]);
    }

    #[test]
    fn blank_cell_rejected_under_reject_policy() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,b,sales\n1,2,3\n4,x,6\n");
        let mut opts = LoadOptions::new("sales");
        opts.drop_policy = DropPolicy::Reject;
        let err = load_csv(&p, &opts).unwrap_err();
        assert!(matches!(err, Error::NonNumeric { ref column, line: 2, .. } if column == "b"));
    }

    #[test]
    fn non_finite_is_not_imputed() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,sales\nNaN,1\ninf,2\n3,4\n");
        let ds = load_csv(&p, &LoadOptions::new("sales")).unwrap();
        assert_eq!(ds.n_rows(), 1);
    }

    #[test]
    fn missing_target_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,b\n1,2\n");
        let err = load_csv(&p, &LoadOptions::new("sales")).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "sales"));
    }

    #[test]
    fn everything_dropped_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "a,sales\n,1\n2,\n");
        assert!(matches!(
            load_csv(&p, &LoadOptions::new("sales")),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn id_column_is_used() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "id,a,sales\n10,1,2\n42,3,4\n");
        let mut opts = LoadOptions::new("sales");
        opts.id_column = Some("id".into());
        let ds = load_csv(&p, &opts).unwrap();
        assert_eq!(ds.row_ids(), [10, 42]);
        assert_eq!(ds.feature_names(), ["a"]);
        assert_eq!(ds.position(42), Some(1));
    }

    #[test]
    fn invariants_are_enforced() {
        let names = vec!["a".to_string(), "a".to_string()];
        assert!(Dataset::new(names, "t", vec![], vec![], vec![]).is_err());
        let names = vec!["a".to_string()];
        assert!(Dataset::new(names.clone(), "t", vec![vec![1.0, 2.0]], vec![1.0], vec![0]).is_err());
        assert!(Dataset::new(names.clone(), "t", vec![vec![f64::NAN]], vec![1.0], vec![0]).is_err());
        assert!(Dataset::new(names, "t", vec![vec![1.0], vec![2.0]], vec![1.0, 2.0], vec![3, 3]).is_err());
    }

    fn years() -> Dataset {
        let rows: Vec<Vec<f64>> = (2010..=2015).map(|y| vec![y as f64, (y - 2000) as f64]).collect();
        Dataset::new(
            vec!["year".into(), "x".into()],
            "sales",
            rows,
            (0..6).map(f64::from).collect(),
            (0..6).collect(),
        )
        .unwrap()
    }

    #[test]
    fn split_by_year() {
        let split = split_by_column_threshold(&years(), "year", 2014.0, false).unwrap();
        assert_eq!(split.train.n_rows(), 4);
        assert_eq!(split.test.n_rows(), 2);
        assert_eq!(split.train.feature_names(), ["x"]);
        assert_eq!(split.test.row_ids(), [4, 5]);
        assert_eq!(split.test.row(0), [14.0]);

        let kept = split_by_column_threshold(&years(), "year", 2014.0, true).unwrap();
        assert_eq!(kept.test.column(0), [2014.0, 2015.0]);
        assert_eq!(kept.train.column(0), [2010.0, 2011.0, 2012.0, 2013.0]);
    }

    #[test]
    fn degenerate_splits() {
        let ds = years();
        assert!(matches!(
            split_by_column_threshold(&ds, "year", 2100.0, false),
            Err(Error::EmptySplit { side: "test", .. })
        ));
        assert!(matches!(
            split_by_column_threshold(&ds, "year", 1900.0, false),
            Err(Error::EmptySplit { side: "training", .. })
        ));
        assert!(matches!(
            split_by_column_threshold(&ds, "month", 1.0, false),
            Err(Error::MissingColumn(_))
        ));
    }
}
