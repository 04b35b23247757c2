//! Certificates for observation masks of partially observed vectors.
//!
//! Suppose each column of a data matrix lies in one of several unknown
//! `r`-dimensional subspaces of `R^d`, and only some entries of each column
//! are observed. If a single `r`-dimensional subspace fits every observed
//! entry, does the complete data actually lie in that subspace — and is the
//! fitting subspace unique? Both questions turn out to depend only on the
//! *pattern* of observed entries, through counting conditions on subsets of
//! columns: a collection of `n` columns must touch at least `n + r` distinct
//! rows.
//!
//! This crate decides those conditions and cross-validates them numerically:
//!
//! - [`mask`] — observation patterns: parsing, validation, subset statistics.
//! - [`certifier`] — the combinatorial side: independence of column sets,
//!   matroid rank, basis search, and uniqueness / all-of-a-kind certificates.
//! - [`geometry`] — the numeric side: subspace bases, orthogonal direction
//!   rows, stacked constraint matrices, kernel dimensions, and fit tests.
//! - [`synth`] — reproducible generators for arrangements, data and masks.
//! - [`oracle`] — deliberately naive brute-force ground truth plus
//!   combinatorial-vs-numeric agreement trials.
//! - [`io`] — matrix and masked-matrix file formats (CSV and JSON).
//! - [`cli`] — the `maskcert` command-line front end.
//!
//! The `examples/` directory exercises each capability end to end; start
//! with `cargo run --example certify_patterns`.

pub mod certifier;
pub mod cli;
pub mod geometry;
pub mod io;
pub mod mask;
pub mod oracle;
pub mod synth;
