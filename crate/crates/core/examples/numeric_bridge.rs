//! The combinatorial-numeric bridge: matroid rank equals SVD rank of the
//! assembled constraint matrix, trial after trial.
//!
//! Run with: cargo run --example numeric_bridge

use maskcert::oracle::agreement_trial;
use maskcert::synth::{AssignmentMode, GenSpec, MaskProperty};

fn main() {
    let spec = GenSpec {
        ambient_dim: 10,
        rank: 2,
        subspace_count: 1,
        column_count: 10,
        seed: 7,
        mask_property: MaskProperty::FailsBoth, // ignored for all-same trials
        assignment_mode: AssignmentMode::AllSame,
    };
    let report = agreement_trial(&spec, 25).unwrap();
    for record in &report.trials {
        println!(
            "trial {:>2} (seed {:>2}): matroid rank = {}, SVD rank = {}, dim ker = {} -> {}",
            record.trial,
            record.seed,
            record.combinatorial_rank,
            record.numeric_rank,
            record.kernel_dim,
            if record.pass { "agree" } else { "DISAGREE" },
        );
    }
    println!("\n{}/{} trials agree", report.passes, report.trials.len());

    // with columns drawn from two different subspaces on a certified mask,
    // the kernel collapses below r: no single subspace can fit
    let mixed = GenSpec {
        ambient_dim: 6,
        rank: 2,
        subspace_count: 2,
        column_count: 7,
        seed: 7,
        mask_property: MaskProperty::SatisfiesT1,
        assignment_mode: AssignmentMode::Mixed,
    };
    let report = agreement_trial(&mixed, 25).unwrap();
    println!(
        "mixed data on certified masks: kernel dropped below r in {}/{} trials",
        report.passes,
        report.trials.len()
    );
}
