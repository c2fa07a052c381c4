//! QSS against random order, max-entropy order and the exact optimum on one instance.
//!
//! `cargo run --release --example baselines`

use cascadia::harness::{generate_instance, instance_seed, ExperimentConfig, Suite};
use cascadia::policies::{default_rho_sweep, evaluate_output, run_policy, PolicyKind, PolicySpec};
use cascadia::UtilityFunction;

fn main() -> cascadia::Result<()> {
    let cfg = ExperimentConfig::new(Suite::BenchmarkFig2);
    let cell = &cfg.cells()[0];
    let inst = generate_instance(&cfg, cell, instance_seed(cfg.seed, 0, 0))?;
    let g = UtilityFunction::from_instance(&inst)?;
    let specs = [
        PolicySpec::new(PolicyKind::Alg2General).with_rho_sweep(default_rho_sweep()),
        PolicySpec::new(PolicyKind::Random).with_seed(1),
        PolicySpec::new(PolicyKind::MaxEnt).with_seed(1),
        PolicySpec::new(PolicyKind::ExactOptimal),
    ];
    println!("cell {cell:?}");
    for spec in specs {
        let out = run_policy(&inst, &g, &spec)?;
        let f = evaluate_output(&inst, &g, &spec, &out)?.value;
        println!("{:<14} {:?} f = {f:.4}", spec.kind.name(), out.sequence);
    }
    Ok(())
}
