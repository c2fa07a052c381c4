//! Position-dependent answer rates: the decay policies with and without PNA.
//!
//! `cargo run --release --example slot_decay`

use cascadia::evaluator::{eval_exact, Variant};
use cascadia::harness::random_instance;
use cascadia::policies::{alg3_decay_no_pna, alg4_decay_pna, InnerConfig};
use cascadia::UtilityFunction;

fn main() -> cascadia::Result<()> {
    let decay = vec![1.0, 0.9, 0.8, 0.7, 0.6];
    let inst = random_instance(8, 5, 21).with_slot_decay(decay);
    let g = UtilityFunction::from_instance(&inst)?;
    let inner = InnerConfig::default();

    let plain = inst.without_pna();
    let a = alg3_decay_no_pna(&plain, &g, 0.3, &inner)?;
    let fa = eval_exact(&a.seq(), &plain, &g, Variant::SlotDecay)?.value;
    println!("no PNA:   {:?} t'={:?} f = {fa:.4}", a.sequence, a.diagnostics.t_prime);

    let b = alg4_decay_pna(&inst, &g, 0.3, &inner)?;
    let fb = eval_exact(&b.seq(), &inst, &g, Variant::SlotDecay)?.value;
    println!("with PNA: {:?} t'={:?} f = {fb:.4}", b.sequence, b.diagnostics.t_prime);
    Ok(())
}
