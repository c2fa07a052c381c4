//! Customers who scroll past questions: answer rates set per (question, slot).
//!
//! `cargo run --release --example scrolling`

use cascadia::evaluator::{eval_exact, Variant};
use cascadia::harness::random_instance;
use cascadia::policies::{alg6_scrolling, InnerConfig};
use cascadia::UtilityFunction;

fn main() -> cascadia::Result<()> {
    let base = random_instance(6, 4, 8);
    let rates: Vec<Vec<f64>> = base
        .questions
        .iter()
        .map(|q| (0..4).map(|i| q.p_answer * 0.85f64.powi(i)).collect())
        .collect();
    let inst = base.with_position_rates(rates);
    let g = UtilityFunction::from_instance(&inst)?;
    let out = alg6_scrolling(&inst, &g, &InnerConfig::default())?;
    let f = eval_exact(&out.seq(), &inst, &g, Variant::Scrolling)?.value;
    println!(
        "sequence {:?}  surrogate {:.4}  f {f:.4}",
        out.sequence, out.surrogate_value
    );
    Ok(())
}
