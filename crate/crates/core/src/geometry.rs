//! Numeric counterpart of the combinatorial certificates.
//!
//! A subspace basis restricted to an observation set spans a hyperplane of
//! `R^(r+1)`; its normal, embedded back into `R^d` with zeros off the set,
//! is the [`DirectionRow`] of that column. Stacking the rows of all columns
//! gives the [`ConstraintMatrix`] `A`: a vector `u` satisfies `A u = 0`
//! exactly when every restriction `u_w` lies in the corresponding restricted
//! subspace. Every `r`-dimensional fitting subspace therefore lives inside
//! `ker A`, and kernel dimensions measured here cross-validate the matroid
//! ranks computed by the certifier: `dim ker A = d - rank(A)`, with `rank(A)`
//! generically equal to the pattern's matroid rank.

use nalgebra::{DMatrix, DVector, RowDVector};
use thiserror::Error;

use crate::mask::{ObservationPattern, ObservationSet};

/// Relative singular-value threshold for numeric rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Relative residual threshold for fit decisions.
pub const DEFAULT_FIT_TOL: f64 = 1e-8;
/// Largest number of row blocks a degeneracy check enumerates exhaustively.
pub const DEGENERACY_BLOCK_CAP: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("basis must be d x r with 1 <= r <= d; got {rows} x {cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("basis columns are numerically dependent: rank {rank} < {cols}")]
    RankDeficientBasis { rank: usize, cols: usize },
    #[error("restriction to rows {rows:?} is numerically singular; the basis violates non-degeneracy")]
    DegenerateRestriction { rows: Vec<usize> },
    #[error("column {column}: restriction to rows {rows:?} is numerically singular")]
    DegenerateColumn { column: usize, rows: Vec<usize> },
    #[error("observation set lives in d = {set_dim} but the basis has d = {basis_dim}")]
    AmbientMismatch { set_dim: usize, basis_dim: usize },
    #[error("pivot row {pivot} is not a member of the observation set")]
    PivotOutsideSet { pivot: usize },
    #[error("direction rows need exactly r + 1 = {expected} observed rows, got {got}")]
    SupportSize { got: usize, expected: usize },
    #[error("assignment has {assignments} entries but the pattern has {columns} columns")]
    AssignmentMismatch { assignments: usize, columns: usize },
    #[error("assignment entry {value} outside 1..={count}")]
    BadAssignment { value: usize, count: usize },
    #[error("arrangement needs at least one basis")]
    NoBases,
    #[error("bases disagree in shape: expected {expected_rows} x {expected_cols}, basis {index} is {rows} x {cols}")]
    MixedShapes { index: usize, rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("basis {index} is degenerate: restriction to rows {rows:?} loses rank")]
    DegenerateBasis { index: usize, rows: Vec<usize> },
    #[error("vector has {got} entries, expected {expected}")]
    VectorLength { got: usize, expected: usize },
}

/// Count of singular values above `tol` times the largest one.
pub fn numeric_rank(matrix: &DMatrix<f64>, tol: f64) -> usize {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return 0;
    }
    let singular = matrix.clone().svd(false, false).singular_values;
    let largest = singular.max();
    if largest <= 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > tol * largest).count()
}

/// Orthonormal basis of the kernel, as columns of a `d x k` matrix.
pub fn kernel_basis(matrix: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let d = matrix.ncols();
    if matrix.nrows() == 0 || d == 0 {
        return DMatrix::identity(d, d);
    }
    // Pad to at least d rows so the decomposition exposes all d right
    // singular vectors; zero rows change nothing else.
    let padded = if matrix.nrows() < d {
        let mut p = DMatrix::zeros(d, d);
        p.view_mut((0, 0), (matrix.nrows(), d)).copy_from(matrix);
        p
    } else {
        matrix.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let singular = &svd.singular_values;
    let largest = singular.max();
    let kernel_rows: Vec<usize> = (0..v_t.nrows())
        .filter(|&i| largest <= 0.0 || singular.get(i).is_none_or(|&s| s <= tol * largest))
        .collect();
    let mut basis = DMatrix::zeros(d, kernel_rows.len());
    for (out_col, &row) in kernel_rows.iter().enumerate() {
        basis.set_column(out_col, &v_t.row(row).transpose());
    }
    basis
}

/// A `d x r` matrix whose columns span one subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    matrix: DMatrix<f64>,
}

impl SubspaceBasis {
    /// Validates the shape and that the columns are numerically independent
    /// at [`DEFAULT_RANK_TOL`].
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, GeometryError> {
        let (rows, cols) = matrix.shape();
        if cols == 0 || cols > rows {
            return Err(GeometryError::BadShape { rows, cols });
        }
        let rank = numeric_rank(&matrix, DEFAULT_RANK_TOL);
        if rank < cols {
            return Err(GeometryError::RankDeficientBasis { rank, cols });
        }
        Ok(Self { matrix })
    }

    /// Builds the basis from row-major data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GeometryError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(GeometryError::BadShape { rows: nrows, cols: ncols });
        }
        Self::new(DMatrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Outcome of a degeneracy scan: the offending row block if one was found,
/// and whether every block was examined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegeneracyCheck {
    pub deficient_rows: Option<Vec<usize>>,
    pub exhaustive: bool,
}

/// A subspace is degenerate when some block of `min(r, d)` basis rows loses
/// rank: some restriction of the subspace is thinner than it should be.
/// Checking blocks of exactly that size suffices, since a smaller deficient
/// block extends to a deficient one of full size.
pub fn is_degenerate(basis: &SubspaceBasis, tol: f64) -> bool {
    degeneracy_check(basis, tol, DEGENERACY_BLOCK_CAP).deficient_rows.is_some()
}

/// Degeneracy scan with an explicit budget. When the number of row blocks
/// exceeds the budget, a deterministic sample of blocks is checked instead
/// and `exhaustive` is false.
pub fn degeneracy_check(basis: &SubspaceBasis, tol: f64, budget: u64) -> DegeneracyCheck {
    let d = basis.ambient_dim();
    let block = basis.rank().min(d);
    let total = binomial(d, block);
    let deficient = |rows: &[usize]| -> bool {
        let restricted = select_rows(basis.matrix(), rows);
        numeric_rank(&restricted, tol) < block
    };
    if total <= u128::from(budget) {
        let mut combo: Vec<usize> = (0..block).collect();
        loop {
            let rows: Vec<usize> = combo.iter().map(|&i| i + 1).collect();
            if deficient(&rows) {
                return DegeneracyCheck { deficient_rows: Some(rows), exhaustive: true };
            }
            if !next_combination(&mut combo, d) {
                break;
            }
        }
        DegeneracyCheck { deficient_rows: None, exhaustive: true }
    } else {
        let mut state = splitmix_seed(d as u64, block as u64);
        for _ in 0..budget {
            let rows = sample_rows(&mut state, d, block);
            if deficient(&rows) {
                return DegeneracyCheck { deficient_rows: Some(rows), exhaustive: false };
            }
        }
        DegeneracyCheck { deficient_rows: None, exhaustive: false }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    result
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn splitmix_seed(a: u64, b: u64) -> u64 {
    a.wrapping_mul(0x9e3779b97f4a7c15) ^ b.wrapping_mul(0xbf58476d1ce4e5b9)
}

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn sample_rows(state: &mut u64, d: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (1..=d).collect();
    for i in 0..k {
        let j = i + (splitmix_next(state) as usize) % (d - i);
        pool.swap(i, j);
    }
    let mut rows = pool[..k].to_vec();
    rows.sort_unstable();
    rows
}

fn select_rows(matrix: &DMatrix<f64>, rows_1based: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows_1based.len(), matrix.ncols());
    for (i, &row) in rows_1based.iter().enumerate() {
        out.set_row(i, &matrix.row(row - 1));
    }
    out
}

/// Rows of the basis at the set's indices, ascending: the restricted basis.
pub fn restrict(basis: &SubspaceBasis, set: &ObservationSet) -> Result<DMatrix<f64>, GeometryError> {
    if set.ambient_dim() != basis.ambient_dim() {
        return Err(GeometryError::AmbientMismatch { set_dim: set.ambient_dim(), basis_dim: basis.ambient_dim() });
    }
    Ok(select_rows(basis.matrix(), set.indices()))
}

/// The normal of one column's restricted subspace, embedded in `R^d`:
/// zero off the support, `1` at the pivot. Orthogonal to every vector of
/// the generating subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionRow {
    entries: RowDVector<f64>,
    support: ObservationSet,
}

impl DirectionRow {
    pub fn entries(&self) -> &RowDVector<f64> {
        &self.entries
    }

    pub fn support(&self) -> &ObservationSet {
        &self.support
    }

    pub fn ambient_dim(&self) -> usize {
        self.entries.ncols()
    }
}

/// Builds the direction row of `basis` on `set` by solving for the pivot
/// entry: with `c = set \ {pivot}`, the row carries `1` at the pivot and
/// `-B_pivot * B_c^{-1}` on `c`, where `B` is the restricted basis. Fails
/// when `B_c` is numerically singular at `tol`, which signals a degenerate
/// basis.
pub fn direction_row(
    basis: &SubspaceBasis,
    set: &ObservationSet,
    pivot: usize,
    tol: f64,
) -> Result<DirectionRow, GeometryError> {
    let r = basis.rank();
    if set.len() != r + 1 {
        return Err(GeometryError::SupportSize { got: set.len(), expected: r + 1 });
    }
    if set.ambient_dim() != basis.ambient_dim() {
        return Err(GeometryError::AmbientMismatch { set_dim: set.ambient_dim(), basis_dim: basis.ambient_dim() });
    }
    if !set.contains(pivot) {
        return Err(GeometryError::PivotOutsideSet { pivot });
    }
    let complement: Vec<usize> = set.indices().iter().copied().filter(|&j| j != pivot).collect();
    let restricted = select_rows(basis.matrix(), &complement); // r x r
    let pivot_row = basis.matrix().row(pivot - 1).transpose(); // r x 1
    let svd = restricted.transpose().svd(true, true);
    let singular = &svd.singular_values;
    let largest = singular.max();
    if largest <= 0.0 || singular.min() <= tol * largest {
        return Err(GeometryError::DegenerateRestriction { rows: complement });
    }
    let coeffs = svd.solve(&pivot_row, 0.0).expect("u and v_t were computed");
    let mut entries = RowDVector::zeros(basis.ambient_dim());
    entries[pivot - 1] = 1.0;
    for (i, &j) in complement.iter().enumerate() {
        entries[j - 1] = -coeffs[i];
    }
    Ok(DirectionRow { entries, support: set.clone() })
}

/// A list of subspace bases plus the assignment mapping each pattern column
/// to the basis it was drawn from (1-based). Every basis must be
/// non-degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    bases: Vec<SubspaceBasis>,
    assignment: Vec<usize>,
}

impl Arrangement {
    pub fn new(bases: Vec<SubspaceBasis>, assignment: Vec<usize>) -> Result<Self, GeometryError> {
        let first = bases.first().ok_or(GeometryError::NoBases)?;
        let (expected_rows, expected_cols) = first.matrix().shape();
        for (index, basis) in bases.iter().enumerate() {
            let (rows, cols) = basis.matrix().shape();
            if (rows, cols) != (expected_rows, expected_cols) {
                return Err(GeometryError::MixedShapes { index: index + 1, rows, cols, expected_rows, expected_cols });
            }
            if let Some(rows) = degeneracy_check(basis, DEFAULT_RANK_TOL, DEGENERACY_BLOCK_CAP).deficient_rows {
                return Err(GeometryError::DegenerateBasis { index: index + 1, rows });
            }
        }
        for &value in &assignment {
            if value == 0 || value > bases.len() {
                return Err(GeometryError::BadAssignment { value, count: bases.len() });
            }
        }
        Ok(Self { bases, assignment })
    }

    pub fn bases(&self) -> &[SubspaceBasis] {
        &self.bases
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn subspace_count(&self) -> usize {
        self.bases.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.bases[0].ambient_dim()
    }

    pub fn rank(&self) -> usize {
        self.bases[0].rank()
    }

    /// The basis assigned to a 1-based data column.
    pub fn basis_for_column(&self, column: usize) -> Result<&SubspaceBasis, GeometryError> {
        let k = *self
            .assignment
            .get(column.wrapping_sub(1))
            .ok_or(GeometryError::AssignmentMismatch { assignments: self.assignment.len(), columns: column })?;
        Ok(&self.bases[k - 1])
    }
}

/// Stacked direction rows of a pattern; `n x d` as a dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    rows: Vec<DirectionRow>,
    ambient_dim: usize,
}

impl ConstraintMatrix {
    pub fn from_rows(rows: Vec<DirectionRow>, ambient_dim: usize) -> Self {
        debug_assert!(rows.iter().all(|r| r.ambient_dim() == ambient_dim));
        Self { rows, ambient_dim }
    }

    pub fn rows(&self) -> &[DirectionRow] {
        &self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.rows.len(), self.ambient_dim);
        for (i, row) in self.rows.iter().enumerate() {
            dense.set_row(i, row.entries());
        }
        dense
    }

    pub fn numeric_rank(&self, tol: f64) -> usize {
        numeric_rank(&self.to_dense(), tol)
    }

    /// `d` minus the numeric rank. With no rows this is all of `R^d`.
    pub fn kernel_dimension(&self, tol: f64) -> usize {
        self.ambient_dim - self.numeric_rank(tol)
    }

    pub fn kernel_basis(&self, tol: f64) -> DMatrix<f64> {
        kernel_basis(&self.to_dense(), tol)
    }
}

/// One direction row per pattern column, from the column's assigned basis,
/// with the pivot fixed to the largest observed row. Any pivot choice gives
/// the same row up to scale; fixing the largest keeps output deterministic.
pub fn assemble_constraints(
    arrangement: &Arrangement,
    pattern: &ObservationPattern,
    tol: f64,
) -> Result<ConstraintMatrix, GeometryError> {
    if arrangement.assignment().len() != pattern.len() {
        return Err(GeometryError::AssignmentMismatch {
            assignments: arrangement.assignment().len(),
            columns: pattern.len(),
        });
    }
    let mut rows = Vec::with_capacity(pattern.len());
    for (idx, set) in pattern.sets().iter().enumerate() {
        let column = idx + 1;
        let basis = arrangement.basis_for_column(column)?;
        let pivot = *set.indices().last().expect("observation sets are nonempty");
        let row = direction_row(basis, set, pivot, tol).map_err(|e| match e {
            GeometryError::DegenerateRestriction { rows } => GeometryError::DegenerateColumn { column, rows },
            other => other,
        })?;
        rows.push(row);
    }
    Ok(ConstraintMatrix::from_rows(rows, pattern.ambient_dim()))
}

/// Whether the observed entries of `vector` (read at the set's rows) are
/// consistent with the subspace: the residual against the restricted span
/// must stay within `tol * max(1, |x|)`.
pub fn fits(basis: &SubspaceBasis, vector: &DVector<f64>, set: &ObservationSet, tol: f64) -> Result<bool, GeometryError> {
    if vector.len() != basis.ambient_dim() {
        return Err(GeometryError::VectorLength { got: vector.len(), expected: basis.ambient_dim() });
    }
    let restricted = restrict(basis, set)?;
    let observed = DVector::from_iterator(set.len(), set.indices().iter().map(|&j| vector[j - 1]));
    let svd = restricted.clone().svd(true, true);
    let largest = svd.singular_values.max();
    let coeffs = svd.solve(&observed, tol * largest.max(f64::MIN_POSITIVE)).expect("u and v_t were computed");
    let residual = (restricted * coeffs - &observed).norm();
    Ok(residual <= tol * observed.norm().max(1.0))
}

/// Whether two column spans coincide at tolerance `tol`, by mutual
/// projection of orthonormalized bases.
fn spans_equal(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let res_ab = (&qb - &qa * (qa.transpose() * &qb)).norm();
    let res_ba = (&qa - &qb * (qb.transpose() * &qa)).norm();
    res_ab <= tol && res_ba <= tol
}

/// Whether `candidate` fits generic data drawn on the pattern: for every
/// column, the candidate's restriction must span exactly the restriction of
/// the column's true subspace.
pub fn fits_pattern(
    candidate: &SubspaceBasis,
    arrangement: &Arrangement,
    pattern: &ObservationPattern,
    tol: f64,
) -> Result<bool, GeometryError> {
    if arrangement.assignment().len() != pattern.len() {
        return Err(GeometryError::AssignmentMismatch {
            assignments: arrangement.assignment().len(),
            columns: pattern.len(),
        });
    }
    for (idx, set) in pattern.sets().iter().enumerate() {
        let truth = arrangement.basis_for_column(idx + 1)?;
        let restricted_candidate = restrict(candidate, set)?;
        let restricted_truth = restrict(truth, set)?;
        if !spans_equal(&restricted_candidate, &restricted_truth, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::ObservationPattern;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn vandermonde_5x2() -> SubspaceBasis {
        SubspaceBasis::from_rows(&[
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 3.0],
            vec![1.0, 4.0],
            vec![1.0, 5.0],
        ])
        .unwrap()
    }

    fn line(values: &[f64]) -> SubspaceBasis {
        SubspaceBasis::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    fn random_basis(d: usize, r: usize, rng: &mut ChaCha8Rng) -> SubspaceBasis {
        loop {
            let m = DMatrix::from_fn(d, r, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            if let Ok(basis) = SubspaceBasis::new(m) {
                if !is_degenerate(&basis, DEFAULT_RANK_TOL) {
                    return basis;
                }
            }
        }
    }

    #[test]
    fn identity_like_basis_is_degenerate() {
        let basis = SubspaceBasis::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let check = degeneracy_check(&basis, DEFAULT_RANK_TOL, DEGENERACY_BLOCK_CAP);
        assert_eq!(check.deficient_rows, Some(vec![2, 3]));
        assert!(check.exhaustive);
    }

    #[test]
    fn vandermonde_is_not_degenerate() {
        assert!(!is_degenerate(&vandermonde_5x2(), DEFAULT_RANK_TOL));
    }

    #[test]
    fn all_ones_line_is_not_degenerate() {
        assert!(!is_degenerate(&line(&[1.0, 1.0, 1.0]), DEFAULT_RANK_TOL));
    }

    #[test]
    fn restrict_picks_rows_in_order() {
        let set = ObservationSet::new([2, 3, 4], 5).unwrap();
        let restricted = restrict(&vandermonde_5x2(), &set).unwrap();
        let expected = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 3.0, 1.0, 4.0]);
        assert_eq!(restricted, expected);
    }

    #[test]
    fn restrict_full_set_and_singleton() {
        let basis = vandermonde_5x2();
        let set = ObservationSet::new(1..=5, 5).unwrap();
        assert_eq!(&restrict(&basis, &set).unwrap(), basis.matrix());
        let single = ObservationSet::new([3], 5).unwrap();
        assert_eq!(restrict(&basis, &single).unwrap(), DMatrix::from_row_slice(1, 2, &[1.0, 3.0]));
    }

    #[test]
    fn direction_row_of_constant_line() {
        let basis = line(&[1.0, 1.0, 1.0]);
        let set = ObservationSet::new([1, 2], 3).unwrap();
        let row = direction_row(&basis, &set, 1, DEFAULT_RANK_TOL).unwrap();
        assert_relative_eq!(row.entries()[0], 1.0);
        assert_relative_eq!(row.entries()[1], -1.0);
        assert_relative_eq!(row.entries()[2], 0.0);
        let product = row.entries() * basis.matrix();
        assert!(product.norm() < 1e-12);
    }

    #[test]
    fn direction_row_on_vandermonde() {
        let basis = vandermonde_5x2();
        let set = ObservationSet::new([1, 2, 3], 5).unwrap();
        let row = direction_row(&basis, &set, 3, DEFAULT_RANK_TOL).unwrap();
        let expected = [1.0, -2.0, 1.0, 0.0, 0.0];
        for (i, &e) in expected.iter().enumerate() {
            assert_relative_eq!(row.entries()[i], e, epsilon = 1e-12);
        }
        assert!((row.entries() * basis.matrix()).norm() < 1e-10);
    }

    #[test]
    fn direction_rows_for_different_pivots_are_parallel() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let basis = random_basis(6, 2, &mut rng);
        let set = ObservationSet::new([2, 4, 5], 6).unwrap();
        let a = direction_row(&basis, &set, 2, DEFAULT_RANK_TOL).unwrap();
        let b = direction_row(&basis, &set, 5, DEFAULT_RANK_TOL).unwrap();
        let na = a.entries().clone().normalize();
        let nb = b.entries().clone().normalize();
        let cosine = (na * nb.transpose())[(0, 0)].abs();
        assert!(cosine > 1.0 - 1e-10, "cosine = {cosine}");
    }

    #[test]
    fn direction_row_invariant_under_change_of_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let basis = random_basis(5, 2, &mut rng);
        let mixer = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 1.0]);
        let remixed = SubspaceBasis::new(basis.matrix() * mixer).unwrap();
        let set = ObservationSet::new([1, 3, 5], 5).unwrap();
        let a = direction_row(&basis, &set, 5, DEFAULT_RANK_TOL).unwrap();
        let b = direction_row(&remixed, &set, 5, DEFAULT_RANK_TOL).unwrap();
        assert!((a.entries() - b.entries()).norm() < 1e-10);
    }

    #[test]
    fn direction_row_rejects_degenerate_complement() {
        let basis =
            SubspaceBasis::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let set = ObservationSet::new([2, 3, 4], 4).unwrap();
        let err = direction_row(&basis, &set, 4, DEFAULT_RANK_TOL).unwrap_err();
        assert_eq!(err, GeometryError::DegenerateRestriction { rows: vec![2, 3] });
    }

    #[test]
    fn assembled_kernel_of_two_lines() {
        // two lines in R^3 observed on {1,2} and {1,3}: the kernel of the
        // stacked constraints is the deceptive line through (1,1,3)
        let arrangement =
            Arrangement::new(vec![line(&[1.0, 1.0, 1.0]), line(&[1.0, 2.0, 3.0])], vec![1, 2]).unwrap();
        let pattern = ObservationPattern::from_columns(&[vec![1, 2], vec![1, 3]], 3, 1).unwrap();
        let constraints = assemble_constraints(&arrangement, &pattern, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(constraints.nrows(), 2);
        assert_eq!(constraints.kernel_dimension(DEFAULT_RANK_TOL), 1);
        let kernel = constraints.kernel_basis(DEFAULT_RANK_TOL);
        assert_eq!(kernel.ncols(), 1);
        let direction = DVector::from_column_slice(&[1.0, 1.0, 3.0]).normalize();
        let cosine = (kernel.column(0).transpose() * direction)[(0, 0)].abs();
        assert!(cosine > 1.0 - 1e-10, "kernel direction {kernel:?}");
    }

    #[test]
    fn single_column_assembles_one_row() {
        let arrangement = Arrangement::new(vec![vandermonde_5x2()], vec![1]).unwrap();
        let pattern = ObservationPattern::from_columns(&[vec![1, 2, 3]], 5, 2).unwrap();
        let constraints = assemble_constraints(&arrangement, &pattern, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(constraints.nrows(), 1);
        assert_eq!(constraints.kernel_dimension(DEFAULT_RANK_TOL), 4);
    }

    #[test]
    fn three_distinct_lines_leave_no_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let bases =
            vec![random_basis(3, 1, &mut rng), random_basis(3, 1, &mut rng), random_basis(3, 1, &mut rng)];
        let arrangement = Arrangement::new(bases, vec![1, 2, 3]).unwrap();
        let pattern = ObservationPattern::from_columns(&[vec![1, 2], vec![1, 3], vec![2, 3]], 3, 1).unwrap();
        let constraints = assemble_constraints(&arrangement, &pattern, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(constraints.numeric_rank(DEFAULT_RANK_TOL), 3);
        assert_eq!(constraints.kernel_dimension(DEFAULT_RANK_TOL), 0);
    }

    #[test]
    fn kernel_dimension_matches_rank_deficit() {
        // four columns piling onto few rows of R^6, all from one random
        // plane: three independent constraints, kernel dimension 6 - 3
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let basis = random_basis(6, 2, &mut rng);
        let arrangement = Arrangement::new(vec![basis], vec![1, 1, 1, 1]).unwrap();
        let pattern = ObservationPattern::from_columns(
            &[vec![1, 2, 3], vec![2, 3, 4], vec![1, 3, 4], vec![4, 5, 6]],
            6,
            2,
        )
        .unwrap();
        let constraints = assemble_constraints(&arrangement, &pattern, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(constraints.numeric_rank(DEFAULT_RANK_TOL), 3);
        assert_eq!(constraints.kernel_dimension(DEFAULT_RANK_TOL), 3);
    }

    #[test]
    fn exhausted_budget_falls_back_to_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let basis = random_basis(10, 2, &mut rng);
        let check = degeneracy_check(&basis, DEFAULT_RANK_TOL, 10);
        assert!(!check.exhaustive);
        assert_eq!(check.deficient_rows, None);
        // a planted deficiency is still caught by the sample
        let mut matrix = basis.matrix().clone();
        matrix.set_row(3, &matrix.row(7).into_owned());
        let degenerate = SubspaceBasis::new(matrix).unwrap();
        let check = degeneracy_check(&degenerate, DEFAULT_RANK_TOL, 30);
        assert!(check.deficient_rows.is_some());
    }

    #[test]
    fn worked_data_columns_lie_in_the_vandermonde_plane() {
        let basis = vandermonde_5x2();
        let data = DMatrix::from_row_slice(
            5,
            3,
            &[
                2.0, 3.0, 2.0, //
                2.0, 6.0, 3.0, //
                2.0, 9.0, 4.0, //
                2.0, 12.0, 5.0, //
                2.0, 15.0, 6.0,
            ],
        );
        let full = ObservationSet::new(1..=5, 5).unwrap();
        for c in 0..3 {
            let column = DVector::from_column_slice(data.column(c).as_slice());
            assert!(fits(&basis, &column, &full, DEFAULT_FIT_TOL).unwrap());
        }
    }

    #[test]
    fn empty_constraint_matrix_has_full_kernel() {
        let constraints = ConstraintMatrix::from_rows(Vec::new(), 4);
        assert_eq!(constraints.kernel_dimension(DEFAULT_RANK_TOL), 4);
        assert_eq!(constraints.kernel_basis(DEFAULT_RANK_TOL).ncols(), 4);
    }

    #[test]
    fn fit_accepts_consistent_observations() {
        let basis = line(&[1.0, 1.0, 3.0]);
        let mut x = DVector::zeros(3);
        x[0] = 1.0;
        x[1] = 1.0;
        let set = ObservationSet::new([1, 2], 3).unwrap();
        assert!(fits(&basis, &x, &set, DEFAULT_FIT_TOL).unwrap());
        let mut y = DVector::zeros(3);
        y[0] = 1.0;
        y[2] = 3.0;
        let set2 = ObservationSet::new([1, 3], 3).unwrap();
        assert!(fits(&basis, &y, &set2, DEFAULT_FIT_TOL).unwrap());
    }

    #[test]
    fn fit_accepts_full_member_and_rejects_generic_outsider() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let basis = random_basis(6, 2, &mut rng);
        let coeffs = DVector::from_fn(2, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let member = basis.matrix() * coeffs;
        let full = ObservationSet::new(1..=6, 6).unwrap();
        assert!(fits(&basis, &member, &full, DEFAULT_FIT_TOL).unwrap());
        let set = ObservationSet::new([1, 3, 6], 6).unwrap();
        for _ in 0..100 {
            let outsider = DVector::from_fn(6, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            assert!(!fits(&basis, &outsider, &set, DEFAULT_FIT_TOL).unwrap());
        }
    }

    #[test]
    fn deceptive_line_fits_the_two_column_pattern() {
        let arrangement =
            Arrangement::new(vec![line(&[1.0, 1.0, 1.0]), line(&[1.0, 2.0, 3.0])], vec![1, 2]).unwrap();
        let pattern = ObservationPattern::from_columns(&[vec![1, 2], vec![1, 3]], 3, 1).unwrap();
        let deceptive = line(&[1.0, 1.0, 3.0]);
        assert!(fits_pattern(&deceptive, &arrangement, &pattern, DEFAULT_FIT_TOL).unwrap());
    }

    #[test]
    fn true_subspace_always_fits_its_own_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let basis = random_basis(7, 2, &mut rng);
            let arrangement = Arrangement::new(vec![basis.clone()], vec![1, 1, 1]).unwrap();
            let pattern =
                ObservationPattern::from_columns(&[vec![1, 2, 3], vec![3, 4, 5], vec![5, 6, 7]], 7, 2).unwrap();
            assert!(fits_pattern(&basis, &arrangement, &pattern, DEFAULT_FIT_TOL).unwrap());
        }
    }

    #[test]
    fn rank_deficient_basis_is_rejected() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(SubspaceBasis::new(m), Err(GeometryError::RankDeficientBasis { .. })));
    }
}
