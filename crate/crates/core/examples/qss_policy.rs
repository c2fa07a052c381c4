//! Question selection and sequencing at several reachability thresholds.
//!
//! `cargo run --release --example qss_policy`

use cascadia::evaluator::{eval_exact, Variant};
use cascadia::harness::random_instance;
use cascadia::policies::{
    alg1_no_pna, alg2_general, default_rho_sweep, evaluate_output, run_policy, InnerConfig, PolicyKind, PolicySpec,
};
use cascadia::UtilityFunction;

fn main() -> cascadia::Result<()> {
    let inst = random_instance(10, 5, 3);
    let g = UtilityFunction::from_instance(&inst)?;
    let inner = InnerConfig::default();

    println!("rho   with-pna sequence          f      | no-pna f");
    for rho in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let out = alg2_general(&inst, &g, rho, &inner)?;
        let f = eval_exact(&out.seq(), &inst, &g, Variant::Basic)?.value;
        let plain = inst.without_pna();
        let no = alg1_no_pna(&plain, &g, rho, &inner)?;
        let fno = eval_exact(&no.seq(), &plain, &g, Variant::Basic)?.value;
        println!("{rho:.1}   {:<24} {f:.4} | {fno:.4}", format!("{:?}", out.sequence));
    }

    let spec = PolicySpec::new(PolicyKind::Alg2General).with_rho_sweep(default_rho_sweep());
    let out = run_policy(&inst, &g, &spec)?;
    let f = evaluate_output(&inst, &g, &spec, &out)?.value;
    println!(
        "sweep picks rho {:?}: {:?} f = {f:.4}",
        out.diagnostics.rho, out.sequence
    );
    Ok(())
}
