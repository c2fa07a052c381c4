//! Simulated customers against the exact value, at growing sample counts.
//!
//! `cargo run --release --example monte_carlo`

use cascadia::evaluator::{eval_exact, eval_monte_carlo, Variant};
use cascadia::harness::random_instance;
use cascadia::{Sequence, UtilityFunction};

fn main() -> cascadia::Result<()> {
    let inst = random_instance(8, 6, 42);
    let g = UtilityFunction::from_instance(&inst)?;
    let seq = Sequence::new(vec![3, 0, 5, 1, 7, 2], &inst)?;
    let exact = eval_exact(&seq, &inst, &g, Variant::Basic)?.value;
    println!("exact        {exact:.5}");
    for n in [100, 1_000, 10_000, 100_000] {
        let mc = eval_monte_carlo(&seq, &inst, &g, Variant::Basic, n, 7)?;
        let se = mc.stderr.unwrap_or(0.0);
        println!(
            "mc {n:>7}   {:.5} ± {:.5}  (|err| / se = {:.2})",
            mc.value,
            se,
            (mc.value - exact).abs() / se
        );
    }
    Ok(())
}
