//! Generate a reproducible arrangement, mask and data in memory.
//!
//! Run with: cargo run --example generate_dataset
//! (The `maskcert generate` subcommand writes the same artifacts to files.)

use maskcert::certifier::{certify_all_of_a_kind, Options};
use maskcert::io::MaskedMatrix;
use maskcert::synth::{random_arrangement, random_mask, sample_columns, AssignmentMode, GenSpec, MaskProperty};

fn main() {
    let spec = GenSpec {
        ambient_dim: 5,
        rank: 2,
        subspace_count: 2,
        column_count: 5,
        seed: 7,
        mask_property: MaskProperty::SatisfiesT1,
        assignment_mode: AssignmentMode::AllSame,
    };

    let mask = random_mask(&spec).unwrap();
    println!("mask drawn until the certificate held:");
    print!("{}", mask.render_grid());
    let cert = certify_all_of_a_kind(&mask, &Options::default()).unwrap();
    println!("certificate: {} with witness {:?}\n", cert.kind, cert.witness);

    let arrangement = random_arrangement(&spec).unwrap();
    println!("drew {} non-degenerate bases of shape {} x {}", arrangement.subspace_count(), 5, 2);

    let (data, assignment) = sample_columns(&arrangement, spec.column_count, spec.assignment_mode, spec.seed ^ 1);
    println!("column assignment: {assignment:?}");
    println!("\nfull data (CSV):\n{}", MaskedMatrix::from_dense(&data).to_csv());
    println!("masked data (CSV, '.' = missing):\n{}", MaskedMatrix::masked_by(&data, &mask).to_csv());
}
