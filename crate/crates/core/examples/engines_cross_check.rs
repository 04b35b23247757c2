//! Race the two independence engines over random masks.
//!
//! Run with: cargo run --example engines_cross_check

use maskcert::certifier::{is_independent, Engine, Options};
use maskcert::synth::uniform_mask;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let brute = Options::with_engine(Engine::Brute);
    let matching = Options::with_engine(Engine::Matching);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0u32;
    let mut dependent = 0u32;
    for _ in 0..500 {
        let r = rng.gen_range(1..=3);
        let d = rng.gen_range(r + 1..=10);
        let n = rng.gen_range(1..=10);
        let pattern = uniform_mask(d, r, n, &mut rng).unwrap();
        let columns = pattern.all_columns();
        let b = is_independent(&pattern, &columns, &brute).unwrap();
        let m = is_independent(&pattern, &columns, &matching).unwrap();
        assert_eq!(b.independent, m.independent, "engines disagree on {}", pattern.to_json());
        checked += 1;
        if !b.independent {
            dependent += 1;
        }
    }
    println!("checked {checked} random masks: engines agree on all of them");
    println!("{dependent} were dependent, {} independent", checked - dependent);
}
