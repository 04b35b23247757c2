//! Parse a mask, inspect subset counts, and validate its assumptions.
//!
//! Run with: cargo run --example parse_and_stats

use maskcert::mask::ObservationPattern;

fn main() {
    // one line per row, one column per vector: 'x' observed, '.' missing
    let text = "x..xx\nxx..x\nxxx..\n.xxxx\n..xx.\n";
    let pattern = ObservationPattern::parse_grid(text, 2).unwrap();
    println!("parsed a {} x {} mask at rank r = {}\n", pattern.ambient_dim(), pattern.len(), pattern.rank());
    print!("{}", pattern.render_grid());

    for column in pattern.all_columns() {
        println!("column {column} observes rows {:?}", pattern.set(column).unwrap().indices());
    }

    // the counts everything else is built on: n columns touching m rows
    for selection in [vec![1, 2], vec![1, 2, 3], pattern.all_columns()] {
        let stats = pattern.subset_stats(&selection).unwrap();
        println!(
            "selection {:?}: n = {}, m = {} (margin m - n - r = {})",
            stats.column_ids,
            stats.n,
            stats.m,
            stats.m as isize - stats.n as isize - pattern.rank() as isize,
        );
    }

    let report = pattern.validate_assumptions();
    println!("\nassumption check: {report}");

    println!("\nJSON form:\n{}", pattern.to_json());
}
