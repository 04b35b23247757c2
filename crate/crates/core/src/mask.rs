//! Observation patterns: which rows of which columns are observed.
//!
//! A column of a `d x N` data matrix observed in the rows `{j1, .., jk}` is
//! described by an [`ObservationSet`]; the ordered collection of all columns'
//! sets is an [`ObservationPattern`]. Everything the certifier decides is a
//! function of these sets alone, through the counts in [`SubsetStats`]:
//! `n` selected columns and `m` distinct rows touched by them.
//!
//! Row and column indices are 1-based everywhere, including reports and
//! serialized forms.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid character for an observed entry.
pub const OBSERVED_MARK: char = 'x';
/// Grid character for a missing entry.
pub const MISSING_MARK: char = '.';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MaskError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid row {row} has {got} cells but row 1 has {expected}")]
    RaggedGrid { row: usize, got: usize, expected: usize },
    #[error("unknown character {ch:?} at grid row {row}, column {column} (expected '{OBSERVED_MARK}' or '{MISSING_MARK}')")]
    UnknownCharacter { ch: char, row: usize, column: usize },
    #[error("column {column} has no observed rows")]
    EmptyColumn { column: usize },
    #[error("row index {index} outside 1..={ambient_dim}")]
    IndexOutOfRange { index: usize, ambient_dim: usize },
    #[error("duplicate row index {index}")]
    DuplicateIndex { index: usize },
    #[error("rank must satisfy 1 <= r < d; got r = {rank}, d = {ambient_dim}")]
    BadRank { rank: usize, ambient_dim: usize },
    #[error("pattern has no columns")]
    NoColumns,
    #[error("ambient dimension mismatch: set has d = {got}, pattern has d = {expected}")]
    AmbientMismatch { got: usize, expected: usize },
    #[error("column selection index {column} outside 1..={count}")]
    ColumnOutOfRange { column: usize, count: usize },
    #[error("observation set of size {size} cannot be split at rank {rank}: at least {} rows are required", rank + 1)]
    Undersized { size: usize, rank: usize },
    #[error("mask JSON malformed: {0}")]
    Json(String),
}

/// The row indices at which one column is observed; a subset of `{1..d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservationSet {
    indices: Vec<usize>,
    ambient_dim: usize,
}

impl ObservationSet {
    /// Builds a set from 1-based row indices. Indices are stored sorted
    /// ascending; duplicates and out-of-range indices are rejected, as is an
    /// empty index list.
    pub fn new(indices: impl IntoIterator<Item = usize>, ambient_dim: usize) -> Result<Self, MaskError> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(MaskError::DuplicateIndex { index: pair[0] });
            }
        }
        if let Some(&index) = indices.iter().find(|&&j| j == 0 || j > ambient_dim) {
            return Err(MaskError::IndexOutOfRange { index, ambient_dim });
        }
        if indices.is_empty() {
            return Err(MaskError::EmptyColumn { column: 1 });
        }
        Ok(Self { indices, ambient_dim })
    }

    /// Sorted 1-based row indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false // size >= 1 by construction
    }

    pub fn contains(&self, row: usize) -> bool {
        self.indices.binary_search(&row).is_ok()
    }
}

/// Ordered collection of observation sets, one per column, with the ambient
/// dimension `d` and the target subspace dimension `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationPattern {
    sets: Vec<ObservationSet>,
    ambient_dim: usize,
    rank: usize,
}

/// `n` / `m` counts of a column selection: `n` columns touching `m` distinct
/// rows. `row_ids` is the union of the selected sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetStats {
    pub n: usize,
    pub m: usize,
    pub column_ids: Vec<usize>,
    pub row_ids: Vec<usize>,
}

impl SubsetStats {
    /// The independence margin test: `m >= n + r`.
    pub fn satisfies_margin(&self, rank: usize) -> bool {
        self.m >= self.n + rank
    }
}

impl ObservationPattern {
    pub fn new(sets: Vec<ObservationSet>, rank: usize) -> Result<Self, MaskError> {
        let ambient_dim = match sets.first() {
            Some(set) => set.ambient_dim(),
            None => return Err(MaskError::NoColumns),
        };
        for set in &sets {
            if set.ambient_dim() != ambient_dim {
                return Err(MaskError::AmbientMismatch {
                    got: set.ambient_dim(),
                    expected: ambient_dim,
                });
            }
        }
        if rank == 0 || rank >= ambient_dim {
            return Err(MaskError::BadRank { rank, ambient_dim });
        }
        Ok(Self { sets, ambient_dim, rank })
    }

    /// Convenience constructor from 1-based index lists.
    pub fn from_columns(columns: &[Vec<usize>], ambient_dim: usize, rank: usize) -> Result<Self, MaskError> {
        let sets = columns
            .iter()
            .enumerate()
            .map(|(i, column)| {
                ObservationSet::new(column.iter().copied(), ambient_dim)
                    .map_err(|e| relabel_column_error(e, i + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sets, rank)
    }

    /// Parses the plain-text grid form: one line per row, one character per
    /// column, `'x'` observed and `'.'` missing. Column `i` of the grid
    /// becomes the `i`-th observation set.
    pub fn parse_grid(text: &str, rank: usize) -> Result<Self, MaskError> {
        let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).filter(|l| !l.is_empty()).collect();
        if lines.is_empty() {
            return Err(MaskError::EmptyGrid);
        }
        let width = lines[0].chars().count();
        if width == 0 {
            return Err(MaskError::EmptyGrid);
        }
        let ambient_dim = lines.len();
        let mut columns: Vec<Vec<usize>> = vec![Vec::new(); width];
        for (row_idx, line) in lines.iter().enumerate() {
            let cells: Vec<char> = line.chars().collect();
            if cells.len() != width {
                return Err(MaskError::RaggedGrid { row: row_idx + 1, got: cells.len(), expected: width });
            }
            for (col_idx, &ch) in cells.iter().enumerate() {
                match ch {
                    OBSERVED_MARK => columns[col_idx].push(row_idx + 1),
                    MISSING_MARK => {}
                    other => {
                        return Err(MaskError::UnknownCharacter { ch: other, row: row_idx + 1, column: col_idx + 1 })
                    }
                }
            }
        }
        Self::from_columns(&columns, ambient_dim, rank)
    }

    /// Renders the canonical grid form (inverse of [`Self::parse_grid`]).
    pub fn render_grid(&self) -> String {
        let mut out = String::with_capacity((self.ambient_dim + 1) * self.len());
        for row in 1..=self.ambient_dim {
            for set in &self.sets {
                out.push(if set.contains(row) { OBSERVED_MARK } else { MISSING_MARK });
            }
            out.push('\n');
        }
        out
    }

    /// Serializes the JSON form `{"d":..,"r":..,"columns":[[..],..]}` with
    /// 1-based row indices.
    pub fn to_json(&self) -> String {
        let repr = PatternRepr {
            d: self.ambient_dim,
            r: self.rank,
            columns: self.sets.iter().map(|s| s.indices().to_vec()).collect(),
        };
        serde_json::to_string(&repr).expect("pattern serialization cannot fail")
    }

    /// Parses the JSON form produced by [`Self::to_json`].
    pub fn from_json(text: &str) -> Result<Self, MaskError> {
        let repr: PatternRepr = serde_json::from_str(text).map_err(|e| MaskError::Json(e.to_string()))?;
        Self::from_columns(&repr.columns, repr.d, repr.r)
    }

    /// Number of columns `N`.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sets(&self) -> &[ObservationSet] {
        &self.sets
    }

    /// The observation set of a 1-based column index.
    pub fn set(&self, column: usize) -> Result<&ObservationSet, MaskError> {
        if column == 0 || column > self.sets.len() {
            return Err(MaskError::ColumnOutOfRange { column, count: self.sets.len() });
        }
        Ok(&self.sets[column - 1])
    }

    /// All column ids, `1..=N`.
    pub fn all_columns(&self) -> Vec<usize> {
        (1..=self.sets.len()).collect()
    }

    /// Counts for a selection of 1-based column ids. Duplicate ids are
    /// collapsed; the empty selection yields `n = 0, m = 0`.
    pub fn subset_stats(&self, selection: &[usize]) -> Result<SubsetStats, MaskError> {
        let mut column_ids: Vec<usize> = selection.to_vec();
        column_ids.sort_unstable();
        column_ids.dedup();
        if let Some(&column) = column_ids.iter().find(|&&c| c == 0 || c > self.sets.len()) {
            return Err(MaskError::ColumnOutOfRange { column, count: self.sets.len() });
        }
        let mut rows = BTreeSet::new();
        for &c in &column_ids {
            rows.extend(self.sets[c - 1].indices().iter().copied());
        }
        Ok(SubsetStats {
            n: column_ids.len(),
            m: rows.len(),
            column_ids,
            row_ids: rows.into_iter().collect(),
        })
    }

    /// Checks the two structural assumptions on a pattern: every set has
    /// exactly `r + 1` rows, and the union of all sets covers `{1..d}`.
    /// Violations are report entries, never errors.
    pub fn validate_assumptions(&self) -> ValidationReport {
        let expected = self.rank + 1;
        let mut violations = Vec::new();
        for (idx, set) in self.sets.iter().enumerate() {
            if set.len() < expected {
                violations.push(AssumptionViolation::ColumnTooSmall { column: idx + 1, size: set.len(), expected });
            } else if set.len() > expected {
                violations.push(AssumptionViolation::ColumnTooLarge { column: idx + 1, size: set.len(), expected });
            }
        }
        let covered: BTreeSet<usize> = self.sets.iter().flat_map(|s| s.indices().iter().copied()).collect();
        let uncovered: Vec<usize> = (1..=self.ambient_dim).filter(|j| !covered.contains(j)).collect();
        if !uncovered.is_empty() {
            violations.push(AssumptionViolation::UncoveredRows { rows: uncovered });
        }
        ValidationReport { violations }
    }
}

fn relabel_column_error(err: MaskError, column: usize) -> MaskError {
    match err {
        MaskError::EmptyColumn { .. } => MaskError::EmptyColumn { column },
        other => other,
    }
}

#[derive(Serialize, Deserialize)]
struct PatternRepr {
    d: usize,
    r: usize,
    columns: Vec<Vec<usize>>,
}

/// One violated assumption, with the offending columns or rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssumptionViolation {
    /// A column observes fewer than `r + 1` rows; such a column could fit
    /// any non-degenerate subspace and carries no usable information.
    ColumnTooSmall { column: usize, size: usize, expected: usize },
    /// A column observes more than `r + 1` rows; see
    /// [`split_oversized`] for the lossless reduction.
    ColumnTooLarge { column: usize, size: usize, expected: usize },
    /// Rows never observed by any column.
    UncoveredRows { rows: Vec<usize> },
}

impl fmt::Display for AssumptionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssumptionViolation::ColumnTooSmall { column, size, expected } => {
                write!(f, "column {column} observes {size} rows, fewer than the required {expected}")
            }
            AssumptionViolation::ColumnTooLarge { column, size, expected } => {
                write!(f, "column {column} observes {size} rows, more than the expected {expected}")
            }
            AssumptionViolation::UncoveredRows { rows } => {
                write!(f, "rows never observed: {rows:?}")
            }
        }
    }
}

/// Result of [`ObservationPattern::validate_assumptions`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<AssumptionViolation>,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn undersized_columns(&self) -> Vec<usize> {
        self.violations
            .iter()
            .filter_map(|v| match v {
                AssumptionViolation::ColumnTooSmall { column, .. } => Some(*column),
                _ => None,
            })
            .collect()
    }

    pub fn oversized_columns(&self) -> Vec<usize> {
        self.violations
            .iter()
            .filter_map(|v| match v {
                AssumptionViolation::ColumnTooLarge { column, .. } => Some(*column),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passes() {
            return write!(f, "assumptions hold");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Splits an oversized observation set into sliding windows of width
/// `r + 1` stepping by one over the sorted indices. The resulting pattern
/// has `|set| - r` columns whose union is the input set, and constrains a
/// fitting subspace exactly as the original column does: each window past
/// the first contributes at least one new row, so every selection of
/// windows touches enough rows to stay independent.
pub fn split_oversized(set: &ObservationSet, rank: usize) -> Result<ObservationPattern, MaskError> {
    if set.len() <= rank {
        return Err(MaskError::Undersized { size: set.len(), rank });
    }
    if rank == 0 || rank >= set.ambient_dim() {
        return Err(MaskError::BadRank { rank, ambient_dim: set.ambient_dim() });
    }
    let windows: Vec<Vec<usize>> = set.indices().windows(rank + 1).map(<[usize]>::to_vec).collect();
    ObservationPattern::from_columns(&windows, set.ambient_dim(), rank)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn staircase_5x3() -> ObservationPattern {
        // columns {1,2,3}, {2,3,4}, {3,4,5} in d = 5
        ObservationPattern::from_columns(&[vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5]], 5, 2).unwrap()
    }

    #[test]
    fn parse_grid_ring_pattern() {
        let p = ObservationPattern::parse_grid("xx.\nx.x\n.xx\n", 1).unwrap();
        assert_eq!(p.ambient_dim(), 3);
        assert_eq!(p.len(), 3);
        assert_eq!(p.set(1).unwrap().indices(), &[1, 2]);
        assert_eq!(p.set(2).unwrap().indices(), &[1, 3]);
        assert_eq!(p.set(3).unwrap().indices(), &[2, 3]);
    }

    #[test]
    fn parse_grid_staircase() {
        let text = "x..\nxx.\nxxx\n.xx\n..x\n";
        let p = ObservationPattern::parse_grid(text, 2).unwrap();
        assert_eq!(p.set(1).unwrap().indices(), &[1, 2, 3]);
        assert_eq!(p.set(2).unwrap().indices(), &[2, 3, 4]);
        assert_eq!(p.set(3).unwrap().indices(), &[3, 4, 5]);
        assert_eq!(p, staircase_5x3());
    }

    #[test]
    fn parse_grid_single_full_column() {
        let p = ObservationPattern::parse_grid("x\nx\nx\n", 2).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.set(1).unwrap().indices(), &[1, 2, 3]);
    }

    #[test]
    fn parse_grid_rejects_ragged() {
        let err = ObservationPattern::parse_grid("xx.\nx.\n.xx\n", 1).unwrap_err();
        assert_eq!(err, MaskError::RaggedGrid { row: 2, got: 2, expected: 3 });
    }

    #[test]
    fn parse_grid_rejects_unknown_character() {
        let err = ObservationPattern::parse_grid("xx.\nxox\n.xx\n", 1).unwrap_err();
        assert!(matches!(err, MaskError::UnknownCharacter { ch: 'o', row: 2, column: 2 }));
    }

    #[test]
    fn parse_grid_rejects_empty() {
        assert_eq!(ObservationPattern::parse_grid("", 1).unwrap_err(), MaskError::EmptyGrid);
        assert_eq!(ObservationPattern::parse_grid("\n\n", 1).unwrap_err(), MaskError::EmptyGrid);
    }

    #[test]
    fn parse_grid_rejects_all_missing_column() {
        let err = ObservationPattern::parse_grid("x.\nx.\n", 1).unwrap_err();
        assert_eq!(err, MaskError::EmptyColumn { column: 2 });
    }

    #[test]
    fn render_round_trips() {
        let p = staircase_5x3();
        let again = ObservationPattern::parse_grid(&p.render_grid(), p.rank()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn json_round_trips() {
        let p = staircase_5x3();
        let again = ObservationPattern::from_json(&p.to_json()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn stats_of_staircase_prefix() {
        let p = staircase_5x3();
        let stats = p.subset_stats(&[1, 2]).unwrap();
        assert_eq!(stats.n, 2);
        assert_eq!(stats.m, 4);
        assert_eq!(stats.row_ids, vec![1, 2, 3, 4]);
        assert_eq!(stats.column_ids, vec![1, 2]);
    }

    #[test]
    fn stats_of_five_column_pattern_prefix() {
        // d = 5, r = 2, five columns; the first two touch four distinct rows.
        let p = ObservationPattern::from_columns(
            &[vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5], vec![1, 4, 5], vec![1, 2, 4]],
            5,
            2,
        )
        .unwrap();
        let stats = p.subset_stats(&[1, 2]).unwrap();
        assert_eq!((stats.n, stats.m), (2, 4));
    }

    #[test]
    fn stats_of_empty_selection() {
        let p = staircase_5x3();
        let stats = p.subset_stats(&[]).unwrap();
        assert_eq!((stats.n, stats.m), (0, 0));
        assert!(stats.row_ids.is_empty());
    }

    #[test]
    fn stats_rejects_out_of_range() {
        let p = staircase_5x3();
        assert!(matches!(p.subset_stats(&[4]), Err(MaskError::ColumnOutOfRange { column: 4, count: 3 })));
        assert!(matches!(p.subset_stats(&[0]), Err(MaskError::ColumnOutOfRange { column: 0, .. })));
    }

    #[test]
    fn validation_passes_on_staircase() {
        assert!(staircase_5x3().validate_assumptions().passes());
    }

    #[test]
    fn validation_flags_undersized_column() {
        let p = ObservationPattern::from_columns(&[vec![1, 2, 3], vec![4, 5]], 5, 2).unwrap();
        let report = p.validate_assumptions();
        assert!(!report.passes());
        assert_eq!(report.undersized_columns(), vec![2]);
    }

    #[test]
    fn validation_flags_uncovered_row() {
        let p = ObservationPattern::from_columns(&[vec![1, 2, 3], vec![2, 3, 4]], 5, 2).unwrap();
        let report = p.validate_assumptions();
        assert_eq!(
            report.violations,
            vec![AssumptionViolation::UncoveredRows { rows: vec![5] }]
        );
    }

    #[test]
    fn split_five_rows() {
        let set = ObservationSet::new(1..=5, 5).unwrap();
        let p = split_oversized(&set, 2).unwrap();
        let columns: Vec<_> = p.sets().iter().map(|s| s.indices().to_vec()).collect();
        assert_eq!(columns, vec![vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5]]);
    }

    #[test]
    fn split_of_exact_size_is_singleton() {
        let set = ObservationSet::new([2, 5, 7], 8).unwrap();
        let p = split_oversized(&set, 2).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.set(1).unwrap().indices(), &[2, 5, 7]);
    }

    #[test]
    fn split_six_rows_covers_and_margins() {
        let set = ObservationSet::new(1..=6, 6).unwrap();
        let p = split_oversized(&set, 2).unwrap();
        assert_eq!(p.len(), 4);
        let union: BTreeSet<usize> = p.sets().iter().flat_map(|s| s.indices().iter().copied()).collect();
        assert_eq!(union, (1..=6).collect());
        // every nonempty subset of windows touches at least n + r rows
        for mask in 1u32..(1 << p.len()) {
            let selection: Vec<usize> = (0..p.len()).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            let stats = p.subset_stats(&selection).unwrap();
            assert!(stats.satisfies_margin(2), "selection {selection:?} fails the margin");
        }
    }

    #[test]
    fn split_rejects_undersized() {
        let set = ObservationSet::new([1, 2], 5).unwrap();
        assert_eq!(split_oversized(&set, 2).unwrap_err(), MaskError::Undersized { size: 2, rank: 2 });
    }

    #[test]
    fn observation_set_rejects_bad_indices() {
        assert!(matches!(ObservationSet::new([0, 1], 3), Err(MaskError::IndexOutOfRange { index: 0, .. })));
        assert!(matches!(ObservationSet::new([1, 4], 3), Err(MaskError::IndexOutOfRange { index: 4, .. })));
        assert!(matches!(ObservationSet::new([2, 2], 3), Err(MaskError::DuplicateIndex { index: 2 })));
    }

    #[test]
    fn pattern_rejects_bad_rank() {
        let sets = vec![ObservationSet::new([1, 2], 3).unwrap()];
        assert!(matches!(ObservationPattern::new(sets.clone(), 0), Err(MaskError::BadRank { .. })));
        assert!(matches!(ObservationPattern::new(sets, 3), Err(MaskError::BadRank { .. })));
    }
}
