//! Certify a handful of masks and read the verdicts.
//!
//! Run with: cargo run --example certify_patterns

use maskcert::certifier::{certify_all_of_a_kind, certify_uniqueness, Options};
use maskcert::mask::ObservationPattern;

fn main() {
    let opts = Options::default();
    let cases = [
        ("five columns in R^5, r = 2", "x..xx\nxx..x\nxxx..\n.xxxx\n..xx.\n", 2),
        ("two columns in R^3, r = 1", "xx\nx.\n.x\n", 1),
        ("ring of three columns in R^3, r = 1", "xx.\nx.x\n.xx\n", 1),
        ("four columns piling up in R^6, r = 2", "x.x.\nxx..\nxxx.\n.xxx\n...x\n...x\n", 2),
    ];
    for (label, grid, rank) in cases {
        let pattern = ObservationPattern::parse_grid(grid, rank).unwrap();
        println!("== {label} ==");
        print!("{}", pattern.render_grid());

        // the strong certificate first; it falls back to uniqueness
        let strong = certify_all_of_a_kind(&pattern, &opts).unwrap();
        print!("{strong}");

        let unique = certify_uniqueness(&pattern, &opts).unwrap();
        println!("uniqueness alone: {}\n", unique.kind);
    }
}
