//! How partially observed data can fit a subspace it never lived in, and
//! how one extra column closes the loophole.
//!
//! Run with: cargo run --example deceptive_fit

use maskcert::certifier::{certify_all_of_a_kind, CertificateKind, Options};
use maskcert::geometry::{
    assemble_constraints, fits_pattern, Arrangement, SubspaceBasis, DEFAULT_FIT_TOL, DEFAULT_RANK_TOL,
};
use maskcert::mask::ObservationPattern;
use nalgebra::DMatrix;

fn line(values: &[f64]) -> SubspaceBasis {
    SubspaceBasis::new(DMatrix::from_column_slice(values.len(), 1, values)).unwrap()
}

fn main() {
    // two different lines in R^3; column 1 comes from the first, column 2
    // from the second
    let arrangement = Arrangement::new(vec![line(&[1.0, 1.0, 1.0]), line(&[1.0, 2.0, 3.0])], vec![1, 2]).unwrap();
    let pattern = ObservationPattern::parse_grid("xx\nx.\n.x\n", 1).unwrap();
    println!("column 1 (from span[1,1,1]) observed on rows {:?}", pattern.set(1).unwrap().indices());
    println!("column 2 (from span[1,2,3]) observed on rows {:?}", pattern.set(2).unwrap().indices());

    // stack the per-column constraints; every fitting line lives in the kernel
    let constraints = assemble_constraints(&arrangement, &pattern, DEFAULT_RANK_TOL).unwrap();
    let kernel = constraints.kernel_basis(DEFAULT_RANK_TOL);
    println!("\nkernel dimension = {} (= r, so a fitting line exists)", kernel.ncols());
    let direction: Vec<f64> = kernel.column(0).iter().map(|v| v / kernel[(0, 0)]).collect();
    println!("fitting direction: [{:.3}, {:.3}, {:.3}]", direction[0], direction[1], direction[2]);

    let deceptive = line(&direction);
    let fits = fits_pattern(&deceptive, &arrangement, &pattern, DEFAULT_FIT_TOL).unwrap();
    println!("that line fits every observed entry: {fits}");
    println!("yet the complete columns do not lie in any single line!");

    let verdict = certify_all_of_a_kind(&pattern, &Options::default()).unwrap();
    println!("\nthe mask warns us: certificate = {} (needs d - r + 1 = 3 columns)", verdict.kind);

    // add a third column observed on rows {2,3}; the ring now certifies
    let bigger = ObservationPattern::parse_grid("xx.\nx.x\n.xx\n", 1).unwrap();
    let verdict = certify_all_of_a_kind(&bigger, &Options::default()).unwrap();
    assert_eq!(verdict.kind, CertificateKind::AllOfAKind);
    println!("\nwith a third column the certificate holds:\n{verdict}");

    // and the numeric side agrees: for mixed assignments no line survives
    let arrangement3 =
        Arrangement::new(vec![line(&[1.0, 1.0, 1.0]), line(&[1.0, 2.0, 3.0])], vec![1, 2, 2]).unwrap();
    let constraints3 = assemble_constraints(&arrangement3, &bigger, DEFAULT_RANK_TOL).unwrap();
    println!(
        "kernel dimension with mixed data on the certified mask: {} (< r: nothing fits)",
        constraints3.kernel_dimension(DEFAULT_RANK_TOL)
    );
}
