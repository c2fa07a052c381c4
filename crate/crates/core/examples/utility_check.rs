//! Monotonicity and submodularity checks, with witnesses for a bad utility.
//!
//! `cargo run --example utility_check`

use cascadia::harness::random_instance;
use cascadia::utility::{check_monotone_submodular, check_utility};
use cascadia::UtilityFunction;

fn main() -> cascadia::Result<()> {
    let inst = random_instance(8, 4, 1);
    let g = UtilityFunction::from_instance(&inst)?;
    let r = check_utility(&g, &inst, 8, 0);
    println!(
        "entropy: monotone={} submodular={} ({} triples)",
        r.monotone, r.submodular, r.checked
    );

    // |S|^2 has increasing gains.
    let ground: Vec<usize> = (0..6).collect();
    let r = check_monotone_submodular(|s| (s.len() * s.len()) as f64, &ground, 6, 0);
    println!("square:  monotone={} submodular={}", r.monotone, r.submodular);
    if let Some(w) = r.witnesses.first() {
        println!("first witness: {}", serde_json::to_string(w)?);
    }
    Ok(())
}
