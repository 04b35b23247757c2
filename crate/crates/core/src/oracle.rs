//! Brute-force ground truth, deliberately naive.
//!
//! Nothing here touches the certifier's engines: independence is decided by
//! walking the whole subset lattice, and the agreement trials compare that
//! count against SVD ranks of assembled constraint matrices. Disagreements
//! are report rows, not errors; they flag either a bug or one of the
//! measure-zero aligned arrangements.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{assemble_constraints, GeometryError, DEFAULT_RANK_TOL};
use crate::mask::{MaskError, ObservationPattern};
use crate::synth::{self, AssignmentMode, GenSpec, MaskProperty, SynthError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest selection the lattice walk accepts.
pub const SELECTION_CAP: usize = 20;
/// Dimension and column caps for numeric trials.
pub const TRIAL_DIM_CAP: usize = 12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("selection has {got} columns, over the brute-force cap of {cap}")]
    SelectionTooLarge { got: usize, cap: usize },
    #[error("trials need d <= {cap} and n <= {cap}; got d = {d}, n = {n}", cap = TRIAL_DIM_CAP)]
    TrialTooLarge { d: usize, n: usize },
    #[error("mixed-assignment trials need an all-of-a-kind mask property")]
    MixedNeedsT1,
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn selection_bits(pattern: &ObservationPattern, selection: &[usize]) -> Result<Vec<u128>, OracleError> {
    let mut columns = selection.to_vec();
    columns.sort_unstable();
    columns.dedup();
    if columns.len() > SELECTION_CAP {
        return Err(OracleError::SelectionTooLarge { got: columns.len(), cap: SELECTION_CAP });
    }
    let mut rows_of = Vec::with_capacity(columns.len());
    for &c in &columns {
        let set = pattern.set(c)?;
        let mut bits: u128 = 0;
        for &j in set.indices() {
            // 128 bits cover the practical d range of the numeric side
            bits |= 1u128 << ((j - 1) % 128);
        }
        // rows beyond 128 fall back to exact counting
        if pattern.ambient_dim() > 128 {
            return Err(OracleError::SelectionTooLarge { got: columns.len(), cap: SELECTION_CAP });
        }
        rows_of.push(bits);
    }
    Ok(rows_of)
}

/// True iff every nonempty subset of the selection touches at least
/// `n + r` distinct rows. Literal enumeration of all `2^n - 1` subsets.
pub fn brute_force_independent(pattern: &ObservationPattern, selection: &[usize]) -> Result<bool, OracleError> {
    let rows_of = selection_bits(pattern, selection)?;
    let r = pattern.rank();
    let n = rows_of.len();
    for mask in 1u32..(1u32 << n) {
        let mut union: u128 = 0;
        for (i, bits) in rows_of.iter().enumerate() {
            if mask >> i & 1 == 1 {
                union |= bits;
            }
        }
        if (union.count_ones() as usize) < (mask.count_ones() as usize) + r {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Maximum cardinality of an independent subset, by exhaustive search over
/// the subset lattice. A subset qualifies when all its sub-subsets pass the
/// margin, which the lattice order lets us reuse.
pub fn brute_force_rank(pattern: &ObservationPattern, selection: &[usize]) -> Result<usize, OracleError> {
    let rows_of = selection_bits(pattern, selection)?;
    let r = pattern.rank();
    let n = rows_of.len();
    if n == 0 {
        return Ok(0);
    }
    // independent[mask] = every nonempty submask has margin >= r
    let mut independent = vec![false; 1 << n];
    independent[0] = true;
    let mut best = 0;
    for mask in 1usize..(1 << n) {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // hereditary: all maximal proper submasks must qualify first
        let mut ok = independent[rest];
        if ok {
            for i in 0..n {
                if mask >> i & 1 == 1 && !independent[mask ^ (1 << i)] {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut union: u128 = 0;
            for (i, bits) in rows_of.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    union |= bits;
                }
            }
            ok = (union.count_ones() as usize) >= mask.count_ones() as usize + r;
        }
        independent[mask] = ok;
        if ok {
            best = best.max(mask.count_ones() as usize);
        }
    }
    Ok(best)
}

/// One numeric-vs-combinatorial comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub mode: AssignmentMode,
    /// Brute-force matroid rank of the drawn mask.
    pub combinatorial_rank: usize,
    /// SVD rank of the assembled constraint matrix.
    pub numeric_rank: usize,
    pub kernel_dim: usize,
    pub pass: bool,
}

/// Aggregated trial outcomes; `failures` lists the seeds to replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementReport {
    pub trials: Vec<TrialRecord>,
    pub passes: usize,
    pub failures: Vec<u64>,
}

impl AgreementReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }

    /// One JSON object per line, one line per trial.
    pub fn to_json_lines(&self) -> String {
        self.trials.iter().map(|t| serde_json::to_string(t).expect("trial serialization")).fold(
            String::new(),
            |mut acc, line| {
                acc.push_str(&line);
                acc.push('\n');
                acc
            },
        )
    }
}

/// Runs seeded trials bridging the combinatorial and numeric sides.
///
/// With `AllSame` assignment (all columns from one subspace) each trial
/// draws a fresh uniform mask and passes when the SVD rank of the assembled
/// constraints equals the brute-force matroid rank, so the kernel dimension
/// is `d - rank`. With `Mixed` assignment the spec must request an
/// all-of-a-kind mask; a trial passes when the kernel dimension drops below
/// `r`, i.e. no `r`-dimensional subspace fits columns from different
/// subspaces. Per-trial seeds are `spec.seed + trial`.
pub fn agreement_trial(spec: &GenSpec, trials: usize) -> Result<AgreementReport, OracleError> {
    if spec.ambient_dim > TRIAL_DIM_CAP || spec.column_count > TRIAL_DIM_CAP {
        return Err(OracleError::TrialTooLarge { d: spec.ambient_dim, n: spec.column_count });
    }
    if spec.assignment_mode == AssignmentMode::Mixed && spec.mask_property != MaskProperty::SatisfiesT1 {
        return Err(OracleError::MixedNeedsT1);
    }
    let mut records = Vec::with_capacity(trials);
    let mut failures = Vec::new();
    for trial in 0..trials {
        let seed = spec.seed.wrapping_add(trial as u64);
        let trial_spec = GenSpec { seed, ..*spec };
        let arrangement = synth::random_arrangement(&trial_spec)?;
        let (pattern, pass, combinatorial_rank, numeric_rank, kernel_dim) = match spec.assignment_mode {
            AssignmentMode::AllSame => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d61736b);
                let pattern = synth::uniform_mask(spec.ambient_dim, spec.rank, spec.column_count, &mut rng)?;
                let ell = brute_force_rank(&pattern, &pattern.all_columns())?;
                let constraints = assemble_constraints(&arrangement, &pattern, DEFAULT_RANK_TOL)?;
                let rank = constraints.numeric_rank(DEFAULT_RANK_TOL);
                let kernel = constraints.kernel_dimension(DEFAULT_RANK_TOL);
                let pass = rank == ell && kernel == spec.ambient_dim - ell;
                (pattern, pass, ell, rank, kernel)
            }
            AssignmentMode::Mixed => {
                let pattern = synth::random_mask(&trial_spec)?;
                let ell = brute_force_rank(&pattern, &pattern.all_columns())?;
                let constraints = assemble_constraints(&arrangement, &pattern, DEFAULT_RANK_TOL)?;
                let rank = constraints.numeric_rank(DEFAULT_RANK_TOL);
                let kernel = constraints.kernel_dimension(DEFAULT_RANK_TOL);
                let pass = kernel < spec.rank;
                (pattern, pass, ell, rank, kernel)
            }
        };
        let _ = pattern;
        if !pass {
            failures.push(seed);
        }
        records.push(TrialRecord {
            trial,
            seed,
            mode: spec.assignment_mode,
            combinatorial_rank,
            numeric_rank,
            kernel_dim,
            pass,
        });
    }
    let passes = records.iter().filter(|t| t.pass).count();
    Ok(AgreementReport { trials: records, passes, failures })
}
