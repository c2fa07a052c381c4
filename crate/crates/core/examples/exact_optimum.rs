//! Exhaustive optimum, its cost estimate, and the compute-cap refusal.
//!
//! `cargo run --release --example exact_optimum`

use cascadia::evaluator::Variant;
use cascadia::harness::random_instance;
use cascadia::policies::{exact_optimal, exact_search_cost};
use cascadia::UtilityFunction;

fn main() -> cascadia::Result<()> {
    let inst = random_instance(9, 4, 13);
    let g = UtilityFunction::from_instance(&inst)?;
    let cost = exact_search_cost(&inst, &g, Variant::Basic);
    println!("estimated cost {cost:.3e}");
    let out = exact_optimal(&inst, &g, Variant::Basic, 1e9)?;
    println!(
        "optimum {:?} f = {:.4} ({} nodes)",
        out.sequence, out.surrogate_value, out.diagnostics.evaluations
    );
    match exact_optimal(&inst, &g, Variant::Basic, cost / 10.0) {
        Err(e) => println!("with a tighter cap: {e} (exit code {})", e.exit_code()),
        Ok(_) => println!("unexpectedly under the cap"),
    }
    Ok(())
}
