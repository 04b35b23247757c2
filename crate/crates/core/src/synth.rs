//! Reproducible generators for arrangements, data columns and masks.
//!
//! All randomness flows from a ChaCha8 stream seeded with [`GenSpec::seed`]
//! via `SeedableRng::seed_from_u64`, with normal variates drawn through
//! `rand_distr::StandardNormal`. Identical specs produce bit-identical
//! artifacts, on any platform and regardless of how callers schedule the
//! calls; dependency versions are pinned by the lockfile.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certifier::{self, CertificateKind, CertifyError, Options};
use crate::geometry::{is_degenerate, Arrangement, GeometryError, SubspaceBasis, DEFAULT_RANK_TOL};
use crate::mask::{MaskError, ObservationPattern};

/// Re-draws of a degenerate basis before giving up (only a broken RNG gets
/// that far).
pub const ARRANGEMENT_RETRY_BUDGET: usize = 16;
/// Mask re-draws before concluding the property is unreachable at this size.
pub const MASK_ATTEMPT_BUDGET: usize = 10_000;

/// Property the generated mask must certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskProperty {
    /// All-of-a-kind certificate holds.
    SatisfiesT1,
    /// Uniqueness holds but all-of-a-kind does not.
    SatisfiesT2Only,
    /// Not even uniqueness holds.
    FailsBoth,
    /// Mask supplied by the caller; no rejection sampling.
    Explicit,
}

/// How data columns map onto subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMode {
    /// Every column from subspace 1.
    AllSame,
    /// Columns round-robin over the K subspaces.
    Mixed,
}

/// Full recipe for one synthetic instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(rename = "d")]
    pub ambient_dim: usize,
    #[serde(rename = "r")]
    pub rank: usize,
    #[serde(rename = "k")]
    pub subspace_count: usize,
    #[serde(rename = "n")]
    pub column_count: usize,
    pub seed: u64,
    #[serde(rename = "property")]
    pub mask_property: MaskProperty,
    #[serde(rename = "assignment")]
    pub assignment_mode: AssignmentMode,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("spec invalid: {reason}")]
    BadSpec { reason: String },
    #[error("drew {budget} degenerate bases in a row; the generator is broken")]
    RetriesExhausted { budget: usize },
    #[error("no mask with the requested property in {budget} draws; try more columns")]
    AttemptsExhausted { budget: usize },
    #[error("explicit masks are supplied by the caller, not drawn")]
    ExplicitMask,
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

fn validate_dims(spec: &GenSpec) -> Result<(), SynthError> {
    if spec.rank == 0 || spec.rank >= spec.ambient_dim {
        return Err(SynthError::BadSpec {
            reason: format!("need 1 <= r < d, got r = {}, d = {}", spec.rank, spec.ambient_dim),
        });
    }
    if spec.subspace_count == 0 {
        return Err(SynthError::BadSpec { reason: "need at least one subspace".into() });
    }
    if spec.column_count == 0 {
        return Err(SynthError::BadSpec { reason: "need at least one column".into() });
    }
    Ok(())
}

/// Draws `K` non-degenerate bases with independent standard-normal entries.
/// Degenerate draws are re-sampled, up to [`ARRANGEMENT_RETRY_BUDGET`] times
/// per basis.
pub fn random_arrangement(spec: &GenSpec) -> Result<Arrangement, SynthError> {
    validate_dims(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut bases = Vec::with_capacity(spec.subspace_count);
    for _ in 0..spec.subspace_count {
        let mut found = None;
        for _ in 0..ARRANGEMENT_RETRY_BUDGET {
            let matrix =
                DMatrix::from_fn(spec.ambient_dim, spec.rank, |_, _| rng.sample::<f64, _>(StandardNormal));
            if let Ok(basis) = SubspaceBasis::new(matrix) {
                if !is_degenerate(&basis, DEFAULT_RANK_TOL) {
                    found = Some(basis);
                    break;
                }
            }
        }
        bases.push(found.ok_or(SynthError::RetriesExhausted { budget: ARRANGEMENT_RETRY_BUDGET })?);
    }
    let assignment = assignment_for(spec.assignment_mode, spec.subspace_count, spec.column_count);
    Ok(Arrangement::new(bases, assignment)?)
}

/// Column-to-subspace assignment for a mode: all ones, or round-robin.
pub fn assignment_for(mode: AssignmentMode, subspace_count: usize, column_count: usize) -> Vec<usize> {
    match mode {
        AssignmentMode::AllSame => vec![1; column_count],
        AssignmentMode::Mixed => (0..column_count).map(|i| i % subspace_count + 1).collect(),
    }
}

/// Draws the data matrix: column `i` is the assigned basis times a
/// standard-normal coefficient vector. Returns the `d x N` matrix and the
/// assignment used.
pub fn sample_columns(
    arrangement: &Arrangement,
    column_count: usize,
    mode: AssignmentMode,
    seed: u64,
) -> (DMatrix<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assignment = assignment_for(mode, arrangement.subspace_count(), column_count);
    let d = arrangement.ambient_dim();
    let r = arrangement.rank();
    let mut data = DMatrix::zeros(d, column_count);
    for (i, &k) in assignment.iter().enumerate() {
        let coeffs = nalgebra::DVector::from_fn(r, |_, _| rng.sample::<f64, _>(StandardNormal));
        data.set_column(i, &(arrangement.bases()[k - 1].matrix() * coeffs));
    }
    (data, assignment)
}

/// One uniform draw: each column observes a uniform random `(r+1)`-subset
/// of the rows. No property is enforced.
pub fn uniform_mask(
    ambient_dim: usize,
    rank: usize,
    column_count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ObservationPattern, MaskError> {
    let columns: Vec<Vec<usize>> = (0..column_count)
        .map(|_| {
            let mut rows: Vec<usize> =
                rand::seq::index::sample(rng, ambient_dim, rank + 1).iter().map(|i| i + 1).collect();
            rows.sort_unstable();
            rows
        })
        .collect();
    ObservationPattern::from_columns(&columns, ambient_dim, rank)
}

/// Rejection-samples uniform masks until the certifier confirms the
/// requested property, within [`MASK_ATTEMPT_BUDGET`] draws.
pub fn random_mask(spec: &GenSpec) -> Result<ObservationPattern, SynthError> {
    validate_dims(spec)?;
    let needed = match spec.mask_property {
        MaskProperty::SatisfiesT1 => spec.ambient_dim - spec.rank + 1,
        MaskProperty::SatisfiesT2Only => spec.ambient_dim - spec.rank,
        MaskProperty::FailsBoth => 1,
        MaskProperty::Explicit => return Err(SynthError::ExplicitMask),
    };
    if spec.column_count < needed {
        return Err(SynthError::BadSpec {
            reason: format!(
                "property {:?} needs at least {needed} columns, spec has {}",
                spec.mask_property, spec.column_count
            ),
        });
    }
    let opts = Options::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MASK_ATTEMPT_BUDGET {
        let pattern = uniform_mask(spec.ambient_dim, spec.rank, spec.column_count, &mut rng)?;
        let ok = match spec.mask_property {
            MaskProperty::SatisfiesT1 => {
                certifier::certify_all_of_a_kind(&pattern, &opts)?.kind == CertificateKind::AllOfAKind
            }
            MaskProperty::SatisfiesT2Only => {
                certifier::certify_uniqueness(&pattern, &opts)?.kind == CertificateKind::Unique
                    && certifier::certify_all_of_a_kind(&pattern, &opts)?.kind != CertificateKind::AllOfAKind
            }
            MaskProperty::FailsBoth => {
                certifier::certify_uniqueness(&pattern, &opts)?.kind == CertificateKind::Indeterminate
            }
            MaskProperty::Explicit => unreachable!(),
        };
        if ok {
            return Ok(pattern);
        }
    }
    Err(SynthError::AttemptsExhausted { budget: MASK_ATTEMPT_BUDGET })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::{certify_all_of_a_kind, certify_uniqueness};
    use crate::geometry::{fits, DEFAULT_FIT_TOL};
    use nalgebra::DVector;

    fn spec(d: usize, r: usize, k: usize, n: usize, seed: u64, p: MaskProperty, m: AssignmentMode) -> GenSpec {
        GenSpec {
            ambient_dim: d,
            rank: r,
            subspace_count: k,
            column_count: n,
            seed,
            mask_property: p,
            assignment_mode: m,
        }
    }

    #[test]
    fn arrangement_is_reproducible_and_non_degenerate() {
        let s = spec(5, 2, 2, 5, 7, MaskProperty::SatisfiesT1, AssignmentMode::AllSame);
        let a = random_arrangement(&s).unwrap();
        let b = random_arrangement(&s).unwrap();
        assert_eq!(a.bases().len(), 2);
        for (x, y) in a.bases().iter().zip(b.bases()) {
            assert_eq!(x.matrix(), y.matrix());
        }
        for basis in a.bases() {
            assert!(!is_degenerate(basis, DEFAULT_RANK_TOL));
        }
    }

    #[test]
    fn singleton_arrangement() {
        let s = spec(4, 1, 1, 3, 3, MaskProperty::FailsBoth, AssignmentMode::AllSame);
        let a = random_arrangement(&s).unwrap();
        assert_eq!(a.subspace_count(), 1);
    }

    #[test]
    fn sampled_columns_lie_in_their_spans() {
        let s = spec(6, 2, 2, 4, 9, MaskProperty::SatisfiesT1, AssignmentMode::AllSame);
        let arrangement = random_arrangement(&s).unwrap();
        let (data, assignment) = sample_columns(&arrangement, 4, AssignmentMode::AllSame, 9);
        assert_eq!(assignment, vec![1, 1, 1, 1]);
        let full = crate::mask::ObservationSet::new(1..=6, 6).unwrap();
        for i in 0..4 {
            let column = DVector::from_column_slice(data.column(i).as_slice());
            assert!(fits(&arrangement.bases()[0], &column, &full, DEFAULT_FIT_TOL).unwrap());
        }
    }

    #[test]
    fn mixed_assignment_round_robins() {
        let s = spec(6, 2, 2, 3, 9, MaskProperty::SatisfiesT1, AssignmentMode::Mixed);
        let arrangement = random_arrangement(&s).unwrap();
        let (_, assignment) = sample_columns(&arrangement, 3, AssignmentMode::Mixed, 1);
        assert_eq!(assignment, vec![1, 2, 1]);
    }

    #[test]
    fn mask_with_t1_property_is_certified() {
        let s = spec(5, 2, 2, 5, 7, MaskProperty::SatisfiesT1, AssignmentMode::AllSame);
        let mask = random_mask(&s).unwrap();
        let cert = certify_all_of_a_kind(&mask, &Options::default()).unwrap();
        assert_eq!(cert.kind, CertificateKind::AllOfAKind);
    }

    #[test]
    fn mask_with_t2_only_property() {
        let s = spec(3, 1, 1, 2, 1, MaskProperty::SatisfiesT2Only, AssignmentMode::AllSame);
        let mask = random_mask(&s).unwrap();
        assert_eq!(certify_uniqueness(&mask, &Options::default()).unwrap().kind, CertificateKind::Unique);
        assert_ne!(
            certify_all_of_a_kind(&mask, &Options::default()).unwrap().kind,
            CertificateKind::AllOfAKind
        );
    }

    #[test]
    fn single_column_mask_fails_both() {
        let s = spec(5, 2, 1, 1, 4, MaskProperty::FailsBoth, AssignmentMode::AllSame);
        let mask = random_mask(&s).unwrap();
        assert_eq!(mask.len(), 1);
        assert_eq!(
            certify_uniqueness(&mask, &Options::default()).unwrap().kind,
            CertificateKind::Indeterminate
        );
    }

    #[test]
    fn masks_are_reproducible() {
        let s = spec(6, 2, 1, 6, 21, MaskProperty::SatisfiesT1, AssignmentMode::AllSame);
        assert_eq!(random_mask(&s).unwrap(), random_mask(&s).unwrap());
    }

    #[test]
    fn t1_needs_enough_columns() {
        let s = spec(5, 2, 1, 3, 3, MaskProperty::SatisfiesT1, AssignmentMode::AllSame);
        assert!(matches!(random_mask(&s), Err(SynthError::BadSpec { .. })));
    }

    #[test]
    fn explicit_property_is_not_drawable() {
        let s = spec(5, 2, 1, 5, 3, MaskProperty::Explicit, AssignmentMode::AllSame);
        assert!(matches!(random_mask(&s), Err(SynthError::ExplicitMask)));
    }
}
