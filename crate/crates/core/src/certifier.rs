//! Combinatorial certificates over observation patterns.
//!
//! A selection of columns is *independent* when every nonempty subset of it
//! touches at least `n + r` distinct rows (`n` = subset size, `r` = subspace
//! dimension). Independence defines a matroid on the columns, and the two
//! headline certificates are subset conditions in that matroid:
//!
//! - **Uniqueness** ([`certify_uniqueness`]): some independent subset of
//!   size `d - r` exists. Then exactly one `r`-dimensional subspace fits
//!   generic data observed on the pattern.
//! - **All of a kind** ([`certify_all_of_a_kind`]): some subset of size
//!   `d - r + 1` has every proper subset independent. Then a fit certifies
//!   that all columns lie in one true subspace of the arrangement, and the
//!   fit equals that subspace.
//!
//! Two interchangeable engines decide independence: literal subset
//! enumeration (ground truth, capped), and a matching check on the Tanner
//! graph between columns and rows — the margin `m >= n + r` holds for all
//! nonempty subsets iff after deleting any `r` touched rows the remaining
//! graph still matches every selected column to a distinct row.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::{MaskError, ObservationPattern};

/// Default ceiling on brute-force subset enumeration (2^20 subsets).
pub const DEFAULT_SUBSET_CAP: u64 = 1 << 20;

/// Which independence engine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Subset enumeration in (cardinality, lexicographic) order. Ground
    /// truth; refuses selections whose enumeration exceeds the cap.
    #[default]
    Brute,
    /// Tanner-graph matching; polynomial for fixed `r`.
    Matching,
    /// Run both and fail loudly on any disagreement.
    Both,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub engine: Engine,
    pub subset_cap: u64,
}

impl Default for Options {
    fn default() -> Self {
        Self { engine: Engine::Brute, subset_cap: DEFAULT_SUBSET_CAP }
    }
}

impl Options {
    pub fn with_engine(engine: Engine) -> Self {
        Self { engine, ..Self::default() }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertifyError {
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error("brute-force enumeration needs {needed} subsets, over the cap of {cap}; raise the cap or switch to the matching engine")]
    CapacityExceeded { needed: u128, cap: u64 },
    #[error("column {column} observes {size} rows but rank {rank} requires exactly {}", rank + 1)]
    SetSizeMismatch { column: usize, size: usize, rank: usize },
    #[error("engines disagree on {selection:?}: brute says independent = {brute}, matching says independent = {matching}")]
    EngineDisagreement { selection: Vec<usize>, brute: bool, matching: bool },
    #[error("target column {target} must not belong to the selection")]
    TargetInSelection { target: usize },
}

/// Outcome of an independence query. When dependent, `violating_subset` is a
/// selection with `m < n + r`, minimal by cardinality among those the engine
/// examined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceVerdict {
    pub independent: bool,
    pub violating_subset: Option<Vec<usize>>,
}

/// A minimal independent set of columns on which `target`'s constraint row
/// is linearly dependent. Always touches exactly `n + r` rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisWitness {
    pub target: usize,
    pub basis_columns: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    #[serde(rename = "UNIQUE")]
    Unique,
    #[serde(rename = "ALL_OF_A_KIND")]
    AllOfAKind,
    #[serde(rename = "INDETERMINATE")]
    Indeterminate,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CertificateKind::Unique => "UNIQUE",
            CertificateKind::AllOfAKind => "ALL_OF_A_KIND",
            CertificateKind::Indeterminate => "INDETERMINATE",
        };
        f.write_str(s)
    }
}

/// One audited check: the columns examined and their counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub subset: Vec<usize>,
    pub n: usize,
    pub m: usize,
}

/// Verdict plus witness subset and the audit trace of decisive checks.
/// `witness` is empty for `INDETERMINATE`; a trace entry with `m < n + r`
/// then records a violating subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub witness: Vec<usize>,
    #[serde(rename = "r")]
    pub rank: usize,
    #[serde(rename = "d")]
    pub ambient_dim: usize,
    pub trace: Vec<TraceEntry>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// First trace entry failing the margin, if any.
    pub fn violating_entry(&self) -> Option<&TraceEntry> {
        self.trace.iter().find(|e| e.m < e.n + self.rank)
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {} (d = {}, r = {})", self.kind, self.ambient_dim, self.rank)?;
        if self.witness.is_empty() {
            writeln!(f, "witness: none")?;
        } else {
            writeln!(f, "witness: columns {:?}", self.witness)?;
        }
        for entry in &self.trace {
            let relation = if entry.m >= entry.n + self.rank { ">=" } else { "<" };
            writeln!(
                f,
                "  subset {:?}: n = {}, m = {} (m {relation} n + r)",
                entry.subset, entry.n, entry.m
            )?;
        }
        Ok(())
    }
}

fn normalize_selection(pattern: &ObservationPattern, selection: &[usize]) -> Result<Vec<usize>, CertifyError> {
    let mut columns = selection.to_vec();
    columns.sort_unstable();
    columns.dedup();
    if let Some(&column) = columns.iter().find(|&&c| c == 0 || c > pattern.len()) {
        return Err(MaskError::ColumnOutOfRange { column, count: pattern.len() }.into());
    }
    Ok(columns)
}

fn check_set_sizes(pattern: &ObservationPattern, columns: &[usize]) -> Result<(), CertifyError> {
    let expected = pattern.rank() + 1;
    for &c in columns {
        let size = pattern.set(c)?.len();
        if size != expected {
            return Err(CertifyError::SetSizeMismatch { column: c, size, rank: pattern.rank() });
        }
    }
    Ok(())
}

/// Decides whether a selection of columns is independent: every nonempty
/// subset touches at least `n + r` distinct rows. Requires every selected
/// column to observe exactly `r + 1` rows.
pub fn is_independent(
    pattern: &ObservationPattern,
    selection: &[usize],
    opts: &Options,
) -> Result<IndependenceVerdict, CertifyError> {
    let columns = normalize_selection(pattern, selection)?;
    check_set_sizes(pattern, &columns)?;
    match opts.engine {
        Engine::Brute => brute_independent(pattern, &columns, opts.subset_cap),
        Engine::Matching => Ok(matching_independent(pattern, &columns)),
        Engine::Both => {
            let brute = brute_independent(pattern, &columns, opts.subset_cap)?;
            let matching = matching_independent(pattern, &columns);
            if brute.independent != matching.independent {
                return Err(CertifyError::EngineDisagreement {
                    selection: columns,
                    brute: brute.independent,
                    matching: matching.independent,
                });
            }
            Ok(brute)
        }
    }
}

/// Row-membership bitsets of the given columns, packed into 64-bit words.
fn column_bits(pattern: &ObservationPattern, columns: &[usize]) -> (usize, Vec<Vec<u64>>) {
    let words = pattern.ambient_dim().div_ceil(64);
    let bits = columns
        .iter()
        .map(|&c| {
            let mut b = vec![0u64; words];
            for &j in pattern.set(c).expect("validated selection").indices() {
                b[(j - 1) / 64] |= 1 << ((j - 1) % 64);
            }
            b
        })
        .collect();
    (words, bits)
}

fn union_count(bits: &[Vec<u64>], members: &[usize], words: usize) -> usize {
    let mut union = vec![0u64; words];
    for &i in members {
        for (w, &word) in union.iter_mut().zip(&bits[i]) {
            *w |= word;
        }
    }
    union.iter().map(|w| w.count_ones() as usize).sum()
}

fn brute_independent(
    pattern: &ObservationPattern,
    columns: &[usize],
    cap: u64,
) -> Result<IndependenceVerdict, CertifyError> {
    let n = columns.len();
    let needed = subsets_of(n);
    if needed > u128::from(cap) {
        return Err(CertifyError::CapacityExceeded { needed, cap });
    }
    let rank = pattern.rank();
    let (words, bits) = column_bits(pattern, columns);
    for k in 1..=n {
        for combo in (0..n).combinations(k) {
            if union_count(&bits, &combo, words) < k + rank {
                let violating = combo.into_iter().map(|i| columns[i]).collect();
                return Ok(IndependenceVerdict { independent: false, violating_subset: Some(violating) });
            }
        }
    }
    Ok(IndependenceVerdict { independent: true, violating_subset: None })
}

fn subsets_of(n: usize) -> u128 {
    if n >= 127 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// Matching engine. Deleting any `r` of the touched rows must leave a
/// matching that saturates every selected column; the first deletion set
/// that fails yields a deficient column set, which is the violating subset.
fn matching_independent(pattern: &ObservationPattern, columns: &[usize]) -> IndependenceVerdict {
    if columns.is_empty() {
        return IndependenceVerdict { independent: true, violating_subset: None };
    }
    let rank = pattern.rank();
    let stats = pattern.subset_stats(columns).expect("validated selection");
    let rows = stats.row_ids;
    for removed in rows.iter().copied().combinations(rank) {
        let kept: Vec<usize> = rows.iter().copied().filter(|j| !removed.contains(j)).collect();
        // adjacency over compacted kept-row indices
        let adjacency: Vec<Vec<usize>> = columns
            .iter()
            .map(|&c| {
                pattern
                    .set(c)
                    .expect("validated selection")
                    .indices()
                    .iter()
                    .filter_map(|j| kept.binary_search(j).ok())
                    .collect()
            })
            .collect();
        let matching = Matching::maximum(&adjacency, kept.len());
        if matching.size < columns.len() {
            let deficient = matching.deficient_left_set(&adjacency);
            let violating: Vec<usize> = deficient.into_iter().map(|l| columns[l]).collect();
            debug_assert!({
                let s = pattern.subset_stats(&violating).expect("validated selection");
                s.m < s.n + rank
            });
            return IndependenceVerdict { independent: false, violating_subset: Some(violating) };
        }
    }
    IndependenceVerdict { independent: true, violating_subset: None }
}

struct Matching {
    size: usize,
    match_of_left: Vec<Option<usize>>,
    match_of_right: Vec<Option<usize>>,
}

impl Matching {
    /// Maximum bipartite matching by repeated augmenting-path search.
    /// Left vertices are tried in index order, so the result is
    /// deterministic for a given adjacency.
    fn maximum(adjacency: &[Vec<usize>], right_count: usize) -> Self {
        let mut match_of_left = vec![None; adjacency.len()];
        let mut match_of_right = vec![None; right_count];
        let mut size = 0;
        for left in 0..adjacency.len() {
            let mut seen = vec![false; right_count];
            if augment(adjacency, left, &mut seen, &mut match_of_left, &mut match_of_right) {
                size += 1;
            }
        }
        Self { size, match_of_left, match_of_right }
    }

    /// Columns reachable from the first unsaturated column by alternating
    /// paths. Their joint neighborhood is strictly smaller than the set
    /// itself, so they witness the failed margin.
    fn deficient_left_set(&self, adjacency: &[Vec<usize>]) -> Vec<usize> {
        let root = self
            .match_of_left
            .iter()
            .position(Option::is_none)
            .expect("a deficient matching leaves some column unsaturated");
        let mut visited_left = vec![false; adjacency.len()];
        let mut visited_right = vec![false; self.match_of_right.len()];
        let mut queue = std::collections::VecDeque::from([root]);
        visited_left[root] = true;
        while let Some(left) = queue.pop_front() {
            for &right in &adjacency[left] {
                if visited_right[right] {
                    continue;
                }
                visited_right[right] = true;
                if let Some(next) = self.match_of_right[right] {
                    if !visited_left[next] {
                        visited_left[next] = true;
                        queue.push_back(next);
                    }
                }
            }
        }
        (0..adjacency.len()).filter(|&l| visited_left[l]).collect()
    }
}

fn augment(
    adjacency: &[Vec<usize>],
    left: usize,
    seen: &mut [bool],
    match_of_left: &mut [Option<usize>],
    match_of_right: &mut [Option<usize>],
) -> bool {
    for &right in &adjacency[left] {
        if seen[right] {
            continue;
        }
        seen[right] = true;
        let free = match match_of_right[right] {
            None => true,
            Some(holder) => augment(adjacency, holder, seen, match_of_left, match_of_right),
        };
        if free {
            match_of_left[left] = Some(right);
            match_of_right[right] = Some(left);
            return true;
        }
    }
    false
}

/// Whether `base` (already independent) stays independent with `candidate`
/// added. Returns a violating subset containing the candidate otherwise.
fn try_extend(
    pattern: &ObservationPattern,
    base: &[usize],
    candidate: usize,
    opts: &Options,
) -> Result<Option<Vec<usize>>, CertifyError> {
    let brute = |cap: u64| -> Result<Option<Vec<usize>>, CertifyError> {
        // only subsets containing the candidate can fail
        let needed = subsets_of(base.len()).saturating_add(1);
        if needed > u128::from(cap) {
            return Err(CertifyError::CapacityExceeded { needed, cap });
        }
        let rank = pattern.rank();
        let mut all = base.to_vec();
        all.push(candidate);
        let (words, bits) = column_bits(pattern, &all);
        let cand_idx = all.len() - 1;
        for k in 0..=base.len() {
            for mut combo in (0..base.len()).combinations(k) {
                combo.push(cand_idx);
                if union_count(&bits, &combo, words) < combo.len() + rank {
                    let mut violating: Vec<usize> = combo.into_iter().map(|i| all[i]).collect();
                    violating.sort_unstable();
                    return Ok(Some(violating));
                }
            }
        }
        Ok(None)
    };
    match opts.engine {
        Engine::Brute => brute(opts.subset_cap),
        Engine::Matching => {
            let mut all = base.to_vec();
            all.push(candidate);
            all.sort_unstable();
            Ok(matching_independent(pattern, &all).violating_subset)
        }
        Engine::Both => {
            let from_brute = brute(opts.subset_cap)?;
            let mut all = base.to_vec();
            all.push(candidate);
            all.sort_unstable();
            let from_matching = matching_independent(pattern, &all);
            if from_brute.is_none() != from_matching.independent {
                return Err(CertifyError::EngineDisagreement {
                    selection: all,
                    brute: from_brute.is_none(),
                    matching: from_matching.independent,
                });
            }
            Ok(from_brute)
        }
    }
}

/// Size of a maximum independent subset of the selection, computed by greedy
/// augmentation in ascending column order (exact because independence is a
/// matroid). Lies in `0..=min(|selection|, d - r)`.
pub fn matroid_rank(
    pattern: &ObservationPattern,
    selection: &[usize],
    opts: &Options,
) -> Result<usize, CertifyError> {
    Ok(greedy_basis(pattern, selection, opts)?.len())
}

/// The greedy maximum independent subset itself (ascending column order).
pub fn greedy_basis(
    pattern: &ObservationPattern,
    selection: &[usize],
    opts: &Options,
) -> Result<Vec<usize>, CertifyError> {
    let columns = normalize_selection(pattern, selection)?;
    check_set_sizes(pattern, &columns)?;
    let mut basis: Vec<usize> = Vec::new();
    for c in columns {
        if try_extend(pattern, &basis, c, opts)?.is_none() {
            basis.push(c);
        }
    }
    Ok(basis)
}

/// Whether adding `target` to the selection leaves the matroid rank
/// unchanged, i.e. the target's constraint row is already implied.
pub fn is_redundant(
    pattern: &ObservationPattern,
    target: usize,
    selection: &[usize],
    opts: &Options,
) -> Result<bool, CertifyError> {
    let columns = normalize_selection(pattern, selection)?;
    if columns.contains(&target) {
        return Err(CertifyError::TargetInSelection { target });
    }
    check_set_sizes(pattern, &[target])?;
    check_set_sizes(pattern, &columns)?;
    // rank(selection + target) == rank(selection) iff the greedy basis of
    // the selection does not extend by the target.
    let basis = greedy_basis(pattern, &columns, opts)?;
    Ok(try_extend(pattern, &basis, target, opts)?.is_some())
}

/// Finds a minimal (by inclusion) independent subset of `selection` on which
/// `target` is redundant, searching by increasing cardinality and then
/// lexicographically. Absent when the target is independent of the whole
/// selection.
pub fn find_basis_of(
    pattern: &ObservationPattern,
    target: usize,
    selection: &[usize],
    opts: &Options,
) -> Result<Option<BasisWitness>, CertifyError> {
    let columns = normalize_selection(pattern, selection)?;
    if columns.contains(&target) {
        return Err(CertifyError::TargetInSelection { target });
    }
    check_set_sizes(pattern, &[target])?;
    check_set_sizes(pattern, &columns)?;
    if opts.engine == Engine::Brute {
        let needed = subsets_of(columns.len()).saturating_mul(2);
        if needed > u128::from(opts.subset_cap) {
            return Err(CertifyError::CapacityExceeded { needed, cap: opts.subset_cap });
        }
    }
    for k in 1..=columns.len() {
        for combo in columns.iter().copied().combinations(k) {
            if !is_independent(pattern, &combo, opts)?.independent {
                continue;
            }
            if try_extend(pattern, &combo, target, opts)?.is_some() {
                // cardinality-first search: no proper subset can work, so
                // the witness is minimal by inclusion
                debug_assert!({
                    let stats = pattern.subset_stats(&combo).expect("validated selection");
                    stats.m == stats.n + pattern.rank()
                });
                return Ok(Some(BasisWitness { target, basis_columns: combo }));
            }
        }
    }
    Ok(None)
}

/// Searches for a basis of `target` of exactly the given size among the
/// remaining columns: the joined set must fail the margin while every
/// maximal proper subset stays independent.
fn find_basis_of_size(
    pattern: &ObservationPattern,
    target: usize,
    size: usize,
    opts: &Options,
) -> Result<Option<Vec<usize>>, CertifyError> {
    let others: Vec<usize> = pattern.all_columns().into_iter().filter(|&c| c != target).collect();
    if others.len() < size {
        return Ok(None);
    }
    let rank = pattern.rank();
    for combo in others.iter().copied().combinations(size) {
        let mut joined = combo.clone();
        joined.push(target);
        joined.sort_unstable();
        let stats = pattern.subset_stats(&joined).expect("validated selection");
        if stats.m >= stats.n + rank {
            continue;
        }
        let all_proper_independent = joined
            .iter()
            .map(|&omit| {
                let subset: Vec<usize> = joined.iter().copied().filter(|&c| c != omit).collect();
                is_independent(pattern, &subset, opts).map(|v| v.independent)
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .all(|ok| ok);
        if all_proper_independent {
            return Ok(Some(combo));
        }
    }
    Ok(None)
}

/// Certifies uniqueness of the fitting subspace: greedy matroid basis
/// extension over all columns; `UNIQUE` iff the basis reaches size `d - r`.
pub fn certify_uniqueness(pattern: &ObservationPattern, opts: &Options) -> Result<Certificate, CertifyError> {
    let columns = pattern.all_columns();
    check_set_sizes(pattern, &columns)?;
    let rank = pattern.rank();
    let goal = pattern.ambient_dim() - rank;
    let mut basis: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    for c in columns {
        match try_extend(pattern, &basis, c, opts)? {
            None => {
                basis.push(c);
                let stats = pattern.subset_stats(&basis).expect("validated selection");
                trace.push(TraceEntry { subset: basis.clone(), n: stats.n, m: stats.m });
                if basis.len() == goal {
                    break;
                }
            }
            Some(violating) => {
                let stats = pattern.subset_stats(&violating).expect("validated selection");
                trace.push(TraceEntry { subset: violating, n: stats.n, m: stats.m });
            }
        }
    }
    let kind = if basis.len() == goal { CertificateKind::Unique } else { CertificateKind::Indeterminate };
    let witness = if kind == CertificateKind::Unique { basis } else { Vec::new() };
    Ok(Certificate { kind, witness, rank, ambient_dim: pattern.ambient_dim(), trace })
}

/// Certifies the all-of-a-kind property: a witness of size `d - r + 1`
/// whose proper subsets all satisfy the margin. Searched as, per candidate
/// column in ascending order, a basis of that column of size exactly
/// `d - r`; the scan stops at the first witness found and is complete
/// because every valid witness contains each of its own columns as a
/// candidate. Falls back to [`certify_uniqueness`] when no witness exists.
///
/// Note that a witness need not pass through every column: patterns exist
/// (duplicated columns piling onto few rows) where some column belongs to
/// no witness even though witnesses exist, so every candidate is tried.
pub fn certify_all_of_a_kind(pattern: &ObservationPattern, opts: &Options) -> Result<Certificate, CertifyError> {
    let columns = pattern.all_columns();
    check_set_sizes(pattern, &columns)?;
    let rank = pattern.rank();
    let basis_size = pattern.ambient_dim() - rank;
    let witness_size = basis_size + 1;
    if pattern.len() >= witness_size {
        for &target in &columns {
            if let Some(basis) = find_basis_of_size(pattern, target, basis_size, opts)? {
                let mut witness = basis;
                witness.push(target);
                witness.sort_unstable();
                let mut trace = Vec::new();
                let stats = pattern.subset_stats(&witness).expect("validated selection");
                trace.push(TraceEntry { subset: witness.clone(), n: stats.n, m: stats.m });
                for &omit in &witness {
                    let subset: Vec<usize> = witness.iter().copied().filter(|&c| c != omit).collect();
                    let stats = pattern.subset_stats(&subset).expect("validated selection");
                    trace.push(TraceEntry { subset, n: stats.n, m: stats.m });
                }
                return Ok(Certificate {
                    kind: CertificateKind::AllOfAKind,
                    witness,
                    rank,
                    ambient_dim: pattern.ambient_dim(),
                    trace,
                });
            }
        }
    }
    certify_uniqueness(pattern, opts)
}
