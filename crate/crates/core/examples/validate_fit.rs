//! The full validation workflow: given masked data and a candidate
//! subspace that fits it, decide whether the data verifiably lies in it.
//!
//! Run with: cargo run --example validate_fit

use maskcert::certifier::{certify_all_of_a_kind, CertificateKind, Options};
use maskcert::geometry::{fits, SubspaceBasis, DEFAULT_FIT_TOL};
use maskcert::mask::ObservationPattern;
use nalgebra::{DMatrix, DVector};

fn main() {
    // masked data: three columns of R^3, each missing one entry
    let observed = [
        (vec![1, 2], vec![2.0, 4.0]),   // column 1: rows 1,2
        (vec![1, 3], vec![1.0, 5.0]),   // column 2: rows 1,3
        (vec![2, 3], vec![6.0, 15.0]),  // column 3: rows 2,3
    ];
    let pattern = ObservationPattern::from_columns(
        &observed.iter().map(|(rows, _)| rows.clone()).collect::<Vec<_>>(),
        3,
        1,
    )
    .unwrap();

    // a completion algorithm proposed this line
    let candidate = SubspaceBasis::new(DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 5.0])).unwrap();

    // check 1: the candidate fits every observed entry
    let mut all_fit = true;
    for (idx, (rows, values)) in observed.iter().enumerate() {
        let set = pattern.set(idx + 1).unwrap();
        let mut vector = DVector::zeros(3);
        for (&j, &v) in rows.iter().zip(values) {
            vector[j - 1] = v;
        }
        let ok = fits(&candidate, &vector, set, DEFAULT_FIT_TOL).unwrap();
        println!("column {} fits: {ok}", idx + 1);
        all_fit &= ok;
    }

    // check 2: the mask itself earns the strong certificate
    let certificate = certify_all_of_a_kind(&pattern, &Options::default()).unwrap();
    println!("mask certificate: {}", certificate.kind);

    let verdict = if !all_fit {
        "NO_FIT: the candidate contradicts the observations"
    } else if certificate.kind == CertificateKind::AllOfAKind {
        "LIES_IN_S: the data verifiably lies in the candidate subspace"
    } else {
        "UNVERIFIED: the fit is consistent but the mask cannot certify it"
    };
    println!("\nverdict: {verdict}");
}
