//! Window an oversized observation set into rank-sized pieces.
//!
//! Run with: cargo run --example split_oversized

use maskcert::mask::{split_oversized, ObservationSet};
use maskcert::oracle::brute_force_independent;

fn main() {
    let rank = 2;
    let set = ObservationSet::new([1, 2, 3, 4, 5], 8).unwrap();
    println!("one column observing rows {:?} of d = 8 at r = {rank}", set.indices());

    let windows = split_oversized(&set, rank).unwrap();
    println!("splits into {} sliding windows:", windows.len());
    print!("{}", windows.render_grid());

    // windows constrain a fitting subspace exactly as the original column:
    // each new window adds a fresh row, so the pieces stay independent
    let independent = brute_force_independent(&windows, &windows.all_columns()).unwrap();
    println!("windows are jointly independent: {independent}");
}
