//! Choosing per question whether to offer "prefer not to answer".
//!
//! `cargo run --release --example pna_decision`

use cascadia::harness::random_instance;
use cascadia::policies::{evaluate_output, run_policy, PolicyKind, PolicySpec};
use cascadia::UtilityFunction;

fn main() -> cascadia::Result<()> {
    let inst = random_instance(8, 4, 5);
    let g = UtilityFunction::from_instance(&inst)?;
    // kappa > 0: customers answer more often when they cannot opt out.
    for kappa in [-0.5, 0.0, 0.3, 0.8] {
        let spec = PolicySpec::new(PolicyKind::Alg5PnaDecision)
            .with_rho(0.3)
            .with_kappa(kappa);
        let out = run_policy(&inst, &g, &spec)?;
        let f = evaluate_output(&inst, &g, &spec, &out)?.value;
        let pna = out.per_question_pna.clone().unwrap_or_default();
        println!("kappa {kappa:+.1}: {:?} pna {:?} f = {f:.4}", out.sequence, pna);
    }
    Ok(())
}
