//! Laboratory-by-measurand data tables: CSV ingestion, column-median
//! imputation and the two bundled inter-laboratory fixtures.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::Real;
use crate::scale::median;

/// Highest fraction of missing cells a column may have and still be imputed.
pub const MAX_MISSING_FRACTION: f64 = 0.25;

pub const DEFAULT_NA_TOKEN: &str = "NA";

const POTASSIUM_CSV: &str = include_str!("../../../data/potassium.csv");
const EIGHT_ELEMENTS_CSV: &str = include_str!("../../../data/eight_elements.csv");

/// Rectangular table of laboratory results. Cells are either finite numbers
/// or missing; row and column identifiers are unique.
#[derive(Debug, Clone)]
pub struct DataMatrix<T = f64> {
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    cells: Vec<Option<T>>,
    // source tokens, kept so that re-serialization reproduces the input text
    text: Option<Vec<Option<String>>>,
}

impl<T: PartialEq> PartialEq for DataMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.row_ids == other.row_ids && self.col_ids == other.col_ids && self.cells == other.cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImputedCell<T> {
    pub row_id: String,
    pub col_id: String,
    pub imputed_value: T,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ImputationRecord<T> {
    pub entries: Vec<ImputedCell<T>>,
}

impl<T> ImputationRecord<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_unique(ids: &[String], dup: fn(String) -> Error) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(dup(id.clone()));
        }
    }
    Ok(())
}

impl<T: Real> DataMatrix<T> {
    /// Builds a matrix from row-major cells, validating the table invariants.
    pub fn new(row_ids: Vec<String>, col_ids: Vec<String>, rows: Vec<Vec<Option<T>>>) -> Result<Self> {
        if row_ids.is_empty() || col_ids.is_empty() {
            return Err(Error::EmptyInput);
        }
        if rows.len() != row_ids.len() {
            return Err(Error::LengthMismatch(row_ids.len(), rows.len()));
        }
        check_unique(&row_ids, Error::DuplicateRowId)?;
        check_unique(&col_ids, Error::DuplicateColumnId)?;
        let p = col_ids.len();
        let mut cells = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRow {
                    line: i + 2,
                    expected: p + 1,
                    found: row.len() + 1,
                });
            }
            for (j, c) in row.into_iter().enumerate() {
                if let Some(v) = c {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteCell {
                            row: row_ids[i].clone(),
                            col: col_ids[j].clone(),
                        });
                    }
                }
                cells.push(c);
            }
        }
        Ok(DataMatrix {
            row_ids,
            col_ids,
            cells,
            text: None,
        })
    }

    /// Complete matrix from column vectors.
    pub fn from_columns(row_ids: Vec<String>, col_ids: Vec<String>, columns: &[Vec<T>]) -> Result<Self> {
        if columns.len() != col_ids.len() {
            return Err(Error::LengthMismatch(col_ids.len(), columns.len()));
        }
        let n = row_ids.len();
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch(n, c.len()));
        }
        let rows = (0..n)
            .map(|i| columns.iter().map(|c| Some(c[i])).collect())
            .collect();
        Self::new(row_ids, col_ids, rows)
    }

    /// Complete matrix with generated ids `r1..rn` and `c1..cp`.
    pub fn from_unlabeled_columns(columns: &[Vec<T>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let rows = (1..=n).map(|i| format!("r{i}")).collect();
        let cols = (1..=columns.len()).map(|j| format!("c{j}")).collect();
        Self::from_columns(rows, cols, columns)
    }

    pub fn nrows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.cells[i * self.ncols() + j]
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.row_ids.iter().position(|r| r == id)
    }

    pub fn col_index(&self, id: &str) -> Option<usize> {
        self.col_ids.iter().position(|c| c == id)
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    fn first_missing(&self) -> Option<Error> {
        let p = self.ncols();
        self.cells.iter().position(Option::is_none).map(|k| Error::MissingCells {
            row: self.row_ids[k / p].clone(),
            col: self.col_ids[k % p].clone(),
        })
    }

    /// Column `j` as a dense vector; errors if any cell is missing.
    pub fn column(&self, j: usize) -> Result<Vec<T>> {
        if j >= self.ncols() {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.ncols(),
            });
        }
        (0..self.nrows())
            .map(|i| {
                self.get(i, j).ok_or_else(|| Error::MissingCells {
                    row: self.row_ids[i].clone(),
                    col: self.col_ids[j].clone(),
                })
            })
            .collect()
    }

    pub fn columns(&self) -> Result<Vec<Vec<T>>> {
        (0..self.ncols()).map(|j| self.column(j)).collect()
    }

    /// Dense n×p matrix; errors if any cell is missing.
    pub fn to_matrix(&self) -> Result<Matrix<T>> {
        if let Some(e) = self.first_missing() {
            return Err(e);
        }
        let p = self.ncols();
        Ok(Matrix::from_fn(self.nrows(), p, |i, j| {
            self.cells[i * p + j].unwrap_or_else(T::zero)
        }))
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        for &j in cols {
            if j >= self.ncols() {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    dim: self.ncols(),
                });
            }
        }
        let rows = (0..self.nrows())
            .map(|i| cols.iter().map(|&j| self.get(i, j)).collect())
            .collect();
        let mut out = Self::new(
            self.row_ids.clone(),
            cols.iter().map(|&j| self.col_ids[j].clone()).collect(),
            rows,
        )?;
        if let Some(text) = &self.text {
            let p = self.ncols();
            out.text = Some(
                (0..self.nrows())
                    .flat_map(|i| cols.iter().map(move |&j| text[i * p + j].clone()))
                    .collect(),
            );
        }
        Ok(out)
    }

    pub fn select_columns_by_name(&self, names: &[&str]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| {
                self.col_index(n)
                    .ok_or_else(|| Error::InvalidArgument(format!("no column named `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.select_columns(&idx)
    }

    /// Copy without the named row.
    pub fn without_row(&self, id: &str) -> Result<Self> {
        let drop = self
            .row_index(id)
            .ok_or_else(|| Error::InvalidArgument(format!("no row named `{id}`")))?;
        let keep: Vec<usize> = (0..self.nrows()).filter(|&i| i != drop).collect();
        self.select_rows(&keep)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let p = self.ncols();
        let cells = rows
            .iter()
            .map(|&i| (0..p).map(|j| self.get(i, j)).collect())
            .collect();
        Self::new(
            rows.iter().map(|&i| self.row_ids[i].clone()).collect(),
            self.col_ids.clone(),
            cells,
        )
    }

    /// Writes the table as CSV. Cells parsed from text keep their original
    /// token; other values use the shortest round-trip representation.
    pub fn to_csv_string(&self, na_token: &str, row_header: &str) -> String {
        let p = self.ncols();
        let mut out = String::new();
        out.push_str(&csv_field(row_header));
        for c in &self.col_ids {
            out.push(',');
            out.push_str(&csv_field(c));
        }
        out.push('\n');
        for i in 0..self.nrows() {
            out.push_str(&csv_field(&self.row_ids[i]));
            for j in 0..p {
                out.push(',');
                let k = i * p + j;
                match (self.cells[k], self.text.as_ref().and_then(|t| t[k].as_deref())) {
                    (None, _) => out.push_str(na_token),
                    (Some(_), Some(tok)) => out.push_str(tok),
                    (Some(v), None) => out.push_str(&v.to_string()),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses comma-separated text: a header row, then one row per laboratory
/// whose first field is the row id and whose remaining fields are decimal
/// numbers or `na_token`.
pub fn parse_csv<T: Real>(text: &str, na_token: &str) -> Result<DataMatrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::Csv(e.to_string()))?,
        None => return Err(Error::EmptyInput),
    };
    if header.len() < 2 {
        return Err(Error::InvalidArgument(
            "header needs a row-id column and at least one data column".into(),
        ));
    }
    let col_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    check_unique(&col_ids, Error::DuplicateColumnId)?;
    let p = col_ids.len();

    let mut row_ids = Vec::new();
    let mut rows = Vec::new();
    let mut tokens = Vec::new();
    for (k, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != p + 1 {
            return Err(Error::RaggedRow {
                line: k + 2,
                expected: p + 1,
                found: rec.len(),
            });
        }
        let id = rec[0].to_string();
        let mut row = Vec::with_capacity(p);
        for (j, tok) in rec.iter().skip(1).enumerate() {
            if tok == na_token {
                row.push(None);
                tokens.push(None);
                continue;
            }
            let v: f64 = tok.parse().map_err(|_| Error::NonNumeric {
                row: id.clone(),
                col: col_ids[j].clone(),
                text: tok.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteCell {
                    row: id.clone(),
                    col: col_ids[j].clone(),
                });
            }
            row.push(Some(T::of(v)));
            tokens.push(Some(tok.to_string()));
        }
        row_ids.push(id);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut m = DataMatrix::new(row_ids, col_ids, rows)?;
    m.text = Some(tokens);
    Ok(m)
}

pub fn read_csv<T: Real>(path: impl AsRef<Path>, na_token: &str) -> Result<DataMatrix<T>> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.as_ref().display())))?;
    parse_csv(&text, na_token)
}

/// Replaces each missing cell by the median of the present values in its
/// column. Columns with no present value, or with more than
/// [`MAX_MISSING_FRACTION`] missing, are rejected.
pub fn impute_median<T: Real>(m: &DataMatrix<T>) -> Result<(DataMatrix<T>, ImputationRecord<T>)> {
    impute_median_capped(m, MAX_MISSING_FRACTION)
}

/// [`impute_median`] with an explicit per-column missing-fraction cap.
pub fn impute_median_capped<T: Real>(
    m: &DataMatrix<T>,
    max_missing_fraction: f64,
) -> Result<(DataMatrix<T>, ImputationRecord<T>)> {
    if !(0.0..=1.0).contains(&max_missing_fraction) {
        return Err(Error::InvalidArgument(format!(
            "missing-fraction cap {max_missing_fraction} outside [0, 1]"
        )));
    }
    let (n, p) = (m.nrows(), m.ncols());
    let mut medians = Vec::with_capacity(p);
    for j in 0..p {
        let present: Vec<T> = (0..n).filter_map(|i| m.get(i, j)).collect();
        let missing = n - present.len();
        if present.is_empty() {
            return Err(Error::ColumnAllMissing(m.col_ids[j].clone()));
        }
        if missing as f64 > max_missing_fraction * n as f64 {
            return Err(Error::TooManyMissing {
                column: m.col_ids[j].clone(),
                missing,
                n,
                cap: max_missing_fraction,
            });
        }
        medians.push(if missing > 0 { Some(median(&present)?) } else { None });
    }

    let mut out = m.clone();
    let mut record = ImputationRecord { entries: Vec::new() };
    for i in 0..n {
        for j in 0..p {
            let k = i * p + j;
            if out.cells[k].is_none() {
                let v = medians[j].expect("median computed for columns with gaps");
                out.cells[k] = Some(v);
                record.entries.push(ImputedCell {
                    row_id: m.row_ids[i].clone(),
                    col_id: m.col_ids[j].clone(),
                    imputed_value: v,
                });
            }
        }
    }
    Ok((out, record))
}

/// Bundled inter-laboratory data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Potassium laboratory means on a QC material and a candidate RM (25 × 2).
    Potassium,
    /// Eight elements in a candidate drinking-water RM (29 × 8, with gaps).
    EightElements,
}

impl Fixture {
    pub fn name(self) -> &'static str {
        match self {
            Fixture::Potassium => "potassium",
            Fixture::EightElements => "eight_elements",
        }
    }

    pub fn csv(self) -> &'static str {
        match self {
            Fixture::Potassium => POTASSIUM_CSV,
            Fixture::EightElements => EIGHT_ELEMENTS_CSV,
        }
    }

    pub fn load<T: Real>(self) -> DataMatrix<T> {
        parse_csv(self.csv(), DEFAULT_NA_TOKEN).expect("bundled fixture parses")
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potassium" => Ok(Fixture::Potassium),
            "eight_elements" => Ok(Fixture::EightElements),
            other => Err(Error::UnknownFixture(other.to_string())),
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Loads a bundled fixture by name.
pub fn fixture<T: Real>(name: &str) -> Result<DataMatrix<T>> {
    Ok(name.parse::<Fixture>()?.load())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(m: &DataMatrix, row: &str, col: &str) -> Option<f64> {
        m.get(m.row_index(row).unwrap(), m.col_index(col).unwrap())
    }

    #[test]
    fn potassium_fixture_shape_and_values() {
        let m: DataMatrix = fixture("potassium").unwrap();
        assert_eq!((m.nrows(), m.ncols()), (25, 2));
        assert_eq!(m.missing_count(), 0);
        assert_eq!(cell(&m, "Lab29", "QC"), Some(5.2550));
        assert_eq!(cell(&m, "Lab29", "RM"), Some(7.7900));
    }

    #[test]
    fn eight_elements_fixture_values() {
        let m: DataMatrix = fixture("eight_elements").unwrap();
        assert_eq!((m.nrows(), m.ncols()), (29, 8));
        assert_eq!(cell(&m, "Lab9", "Arsenic"), Some(30.916));
        // a reported zero, not a gap
        assert_eq!(cell(&m, "Lab23", "Nickel"), Some(0.0));
        assert_eq!(cell(&m, "Lab10", "Nickel"), None);
    }

    #[test]
    fn eight_elements_missing_census() {
        let m: DataMatrix = fixture("eight_elements").unwrap();
        // counted token by token from the source table
        let census = EIGHT_ELEMENTS_CSV
            .lines()
            .skip(1)
            .flat_map(|l| l.split(',').skip(1))
            .filter(|t| *t == "NA")
            .count();
        assert_eq!(census, 11);
        assert_eq!(m.missing_count(), census);
        let expected = [
            ("Lab10", "Nickel"),
            ("Lab15", "Lead"),
            ("Lab15", "Zinc"),
            ("Lab23", "Arsenic"),
            ("Lab24", "Zinc"),
            ("Lab27", "Arsenic"),
            ("Lab27", "Cadmium"),
            ("Lab27", "Chromium"),
            ("Lab28", "Cadmium"),
            ("Lab28", "Lead"),
            ("Lab28", "Nickel"),
        ];
        for (r, c) in expected {
            assert_eq!(cell(&m, r, c), None, "{r} {c}");
        }
    }

    #[test]
    fn unknown_fixture() {
        assert_eq!(
            fixture::<f64>("sodium").unwrap_err(),
            Error::UnknownFixture("sodium".into())
        );
    }

    #[test]
    fn header_only_is_empty_input() {
        assert_eq!(parse_csv::<f64>("id,a,b\n", "NA").unwrap_err(), Error::EmptyInput);
        assert_eq!(parse_csv::<f64>("", "NA").unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_csv::<f64>("id,a,b\nx,1,2\ny,1\n", "NA"),
            Err(Error::RaggedRow { line: 3, .. })
        ));
        assert_eq!(
            parse_csv::<f64>("id,a,b\nx,1,2\nx,3,4\n", "NA").unwrap_err(),
            Error::DuplicateRowId("x".into())
        );
        assert_eq!(
            parse_csv::<f64>("id,a,a\nx,1,2\n", "NA").unwrap_err(),
            Error::DuplicateColumnId("a".into())
        );
        assert!(matches!(
            parse_csv::<f64>("id,a\nx,abc\n", "NA"),
            Err(Error::NonNumeric { .. })
        ));
        assert!(matches!(
            parse_csv::<f64>("id,a\nx,inf\n", "NA"),
            Err(Error::NonFiniteCell { .. })
        ));
    }

    #[test]
    fn custom_na_token() {
        let m = parse_csv::<f64>("id,a\nx,-\ny,2\n", "-").unwrap();
        assert_eq!(m.missing_count(), 1);
        // with the default token the dash is not a number
        assert!(parse_csv::<f64>("id,a\nx,-\ny,2\n", "NA").is_err());
    }

    #[test]
    fn impute_two_value_median() {
        let m = parse_csv::<f64>("id,a\nx,1\ny,NA\nz,3\n", "NA").unwrap();
        // one gap in three rows is over the default cap
        assert!(matches!(impute_median(&m), Err(Error::TooManyMissing { missing: 1, n: 3, .. })));
        let (out, rec) = impute_median_capped(&m, 0.5).unwrap();
        assert_eq!(out.column(0).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(rec.entries.len(), 1);
        assert_eq!(rec.entries[0].row_id, "y");
        assert_eq!(rec.entries[0].imputed_value, 2.0);
    }

    #[test]
    fn impute_complete_is_identity() {
        let m: DataMatrix = fixture("potassium").unwrap();
        let (out, rec) = impute_median(&m).unwrap();
        assert_eq!(out, m);
        assert!(rec.is_empty());
    }

    #[test]
    fn impute_rejects_empty_and_sparse_columns() {
        let m = parse_csv::<f64>("id,a,b\nx,1,NA\ny,2,NA\n", "NA").unwrap();
        assert_eq!(impute_median(&m).unwrap_err(), Error::ColumnAllMissing("b".into()));
        let m = parse_csv::<f64>("id,a\nw,1\nx,NA\ny,2\nz,NA\n", "NA").unwrap();
        assert!(matches!(impute_median(&m), Err(Error::TooManyMissing { .. })));
        // exactly one in four is allowed
        let m = parse_csv::<f64>("id,a\nw,1\nx,NA\ny,2\nz,5\n", "NA").unwrap();
        assert!(impute_median(&m).is_ok());
    }

    #[test]
    fn serialization_keeps_source_tokens() {
        assert_eq!(
            fixture::<f64>("eight_elements").unwrap().to_csv_string("NA", "Laboratory"),
            EIGHT_ELEMENTS_CSV
        );
    }
}
