//! File formats for matrices, masked matrices and patterns.
//!
//! Matrices travel as CSV (comma-separated rows) or JSON (array of rows).
//! Missing entries are the literal token `.` in CSV and `null` in JSON,
//! mirroring the mask grid convention.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::geometry::{Arrangement, SubspaceBasis};
use crate::mask::{MaskError, ObservationPattern};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}, field {field}: cannot parse {text:?} as a number")]
    BadNumber { row: usize, field: usize, text: String },
    #[error("row {row} has {got} fields but row 1 has {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("matrix JSON malformed: {0}")]
    Json(String),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

fn write_file(path: &Path, content: &str) -> Result<(), IoError> {
    std::fs::write(path, content).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

/// Dense row-major matrix in which entries may be missing.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMatrix {
    rows: usize,
    cols: usize,
    values: Vec<Option<f64>>,
}

impl MaskedMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<Option<f64>>) -> Self {
        assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at 0-based (row, col).
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.cols + col]
    }

    /// Fully observed view, if nothing is missing.
    pub fn to_dense(&self) -> Option<DMatrix<f64>> {
        if self.values.iter().any(Option::is_none) {
            return None;
        }
        Some(DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).unwrap()))
    }

    /// Drops every entry outside the pattern: column `i` keeps only the
    /// rows in its observation set.
    pub fn masked_by(dense: &DMatrix<f64>, pattern: &ObservationPattern) -> Self {
        let (rows, cols) = dense.shape();
        let mut values = vec![None; rows * cols];
        for (c, set) in pattern.sets().iter().enumerate() {
            for &j in set.indices() {
                values[(j - 1) * cols + c] = Some(dense[(j - 1, c)]);
            }
        }
        Self { rows, cols, values }
    }

    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let (rows, cols) = dense.shape();
        let values = (0..rows * cols).map(|i| Some(dense[(i / cols, i % cols)])).collect();
        Self { rows, cols, values }
    }

    pub fn parse_csv(text: &str) -> Result<Self, IoError> {
        let mut values = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (row_idx, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let expected = *cols.get_or_insert(fields.len());
            if fields.len() != expected {
                return Err(IoError::RaggedRow { row: row_idx + 1, got: fields.len(), expected });
            }
            for (field_idx, field) in fields.iter().enumerate() {
                if *field == "." {
                    values.push(None);
                } else {
                    let parsed = field.parse::<f64>().map_err(|_| IoError::BadNumber {
                        row: row_idx + 1,
                        field: field_idx + 1,
                        text: (*field).to_string(),
                    })?;
                    values.push(Some(parsed));
                }
            }
            rows += 1;
        }
        let cols = cols.ok_or(IoError::Empty)?;
        if rows == 0 || cols == 0 {
            return Err(IoError::Empty);
        }
        Ok(Self { rows, cols, values })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    out.push(',');
                }
                match self.get(i, j) {
                    Some(v) => write!(out, "{v}").expect("string write"),
                    None => out.push('.'),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_json(text: &str) -> Result<Self, IoError> {
        let rows: Vec<Vec<Option<f64>>> = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(IoError::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(IoError::RaggedRow { row: i + 1, got: row.len(), expected: ncols });
            }
        }
        Ok(Self { rows: nrows, cols: ncols, values: rows.into_iter().flatten().collect() })
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<Option<f64>>> =
            (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j)).collect()).collect();
        serde_json::to_string(&rows).expect("matrix serialization")
    }
}

/// Reads a matrix file, JSON when the extension is `.json`, CSV otherwise.
pub fn read_masked_matrix(path: &Path) -> Result<MaskedMatrix, IoError> {
    let text = read_file(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        MaskedMatrix::parse_json(&text)
    } else {
        MaskedMatrix::parse_csv(&text)
    }
}

pub fn write_masked_matrix(path: &Path, matrix: &MaskedMatrix) -> Result<(), IoError> {
    let content = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let mut s = matrix.to_json();
        s.push('\n');
        s
    } else {
        matrix.to_csv()
    };
    write_file(path, &content)
}

/// Reads a pattern file: JSON when it starts with `{`, the grid otherwise.
pub fn read_pattern(path: &Path, rank: usize) -> Result<ObservationPattern, IoError> {
    let text = read_file(path)?;
    if text.trim_start().starts_with('{') {
        Ok(ObservationPattern::from_json(&text)?)
    } else {
        Ok(ObservationPattern::parse_grid(&text, rank)?)
    }
}

pub fn write_text(path: &Path, content: &str) -> Result<(), IoError> {
    write_file(path, content)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ArrangementRepr {
    d: usize,
    r: usize,
    bases: Vec<Vec<Vec<f64>>>,
    assignment: Vec<usize>,
}

/// `{"d":..,"r":..,"bases":[[[row],..],..],"assignment":[..]}` with each
/// basis as rows.
pub fn arrangement_to_json(arrangement: &Arrangement) -> String {
    let repr = ArrangementRepr {
        d: arrangement.ambient_dim(),
        r: arrangement.rank(),
        bases: arrangement
            .bases()
            .iter()
            .map(|b| (0..b.ambient_dim()).map(|i| b.matrix().row(i).iter().copied().collect()).collect())
            .collect(),
        assignment: arrangement.assignment().to_vec(),
    };
    serde_json::to_string(&repr).expect("arrangement serialization")
}

pub fn arrangement_from_json(text: &str) -> Result<Arrangement, IoError> {
    let repr: ArrangementRepr = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let bases = repr
        .bases
        .iter()
        .map(|rows| SubspaceBasis::from_rows(rows))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| IoError::Json(e.to_string()))?;
    for basis in &bases {
        if basis.ambient_dim() != repr.d || basis.rank() != repr.r {
            return Err(IoError::Json(format!(
                "basis is {} x {}, header says {} x {}",
                basis.ambient_dim(),
                basis.rank(),
                repr.d,
                repr.r
            )));
        }
    }
    Arrangement::new(bases, repr.assignment).map_err(|e| IoError::Json(e.to_string()))
}

pub fn read_arrangement(path: &Path) -> Result<Arrangement, IoError> {
    arrangement_from_json(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_missing() {
        let text = "1,.,3\n.,5,6\n";
        let m = MaskedMatrix::parse_csv(text).unwrap();
        assert_eq!(m.get(0, 1), None);
        assert_eq!(m.get(1, 1), Some(5.0));
        assert_eq!(m.to_csv(), text);
    }

    #[test]
    fn json_round_trip_with_missing() {
        let m = MaskedMatrix::parse_json("[[1, null], [2.5, 3]]").unwrap();
        assert_eq!(m.get(0, 1), None);
        let again = MaskedMatrix::parse_json(&m.to_json()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn csv_rejects_garbage_and_ragged() {
        assert!(matches!(MaskedMatrix::parse_csv("1,b\n"), Err(IoError::BadNumber { row: 1, field: 2, .. })));
        assert!(matches!(MaskedMatrix::parse_csv("1,2\n3\n"), Err(IoError::RaggedRow { row: 2, .. })));
        assert!(matches!(MaskedMatrix::parse_csv(""), Err(IoError::Empty)));
    }

    #[test]
    fn masking_by_pattern_blanks_unobserved() {
        let dense = DMatrix::from_row_slice(3, 2, &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        let pattern = ObservationPattern::from_columns(&[vec![1, 2], vec![1, 3]], 3, 1).unwrap();
        let masked = MaskedMatrix::masked_by(&dense, &pattern);
        assert_eq!(masked.get(0, 0), Some(1.0));
        assert_eq!(masked.get(2, 0), None);
        assert_eq!(masked.get(1, 1), None);
        assert_eq!(masked.get(2, 1), Some(6.0));
        assert!(masked.to_dense().is_none());
        assert!(MaskedMatrix::from_dense(&dense).to_dense().is_some());
    }

    #[test]
    fn arrangement_round_trips() {
        let bases = vec![
            SubspaceBasis::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap(),
            SubspaceBasis::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap(),
        ];
        let arrangement = Arrangement::new(bases, vec![1, 2]).unwrap();
        let again = arrangement_from_json(&arrangement_to_json(&arrangement)).unwrap();
        assert_eq!(arrangement, again);
    }

    #[test]
    fn pattern_file_sniffing() {
        let dir = tempfile::tempdir().unwrap();
        let grid_path = dir.path().join("mask.txt");
        std::fs::write(&grid_path, "xx.\nx.x\n.xx\n").unwrap();
        let grid = read_pattern(&grid_path, 1).unwrap();
        let json_path = dir.path().join("mask.json");
        std::fs::write(&json_path, grid.to_json()).unwrap();
        let json = read_pattern(&json_path, 1).unwrap();
        assert_eq!(grid, json);
    }
}
