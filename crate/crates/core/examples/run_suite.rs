//! A reduced ratio suite and PNA study, printed as CSV.
//!
//! `cargo run --release --example run_suite`

use cascadia::harness::{run_suite, to_csv, ExperimentConfig, Suite};

fn main() -> cascadia::Result<()> {
    let mut cfg = ExperimentConfig::new(Suite::RatioTable2);
    cfg.instances_per_cell = 5;
    let res = run_suite(&cfg)?;
    for a in &res.aggregates {
        println!(
            "p+={:.1} c+={:.1} p-={:.1} c-={:.1} {:<4} ratio min {:.3} mean {:.3}",
            a.cell_p_plus,
            a.cell_c_plus,
            a.cell_p_minus,
            a.cell_c_minus,
            a.policy,
            a.ratio_min.unwrap_or(f64::NAN),
            a.ratio_mean.unwrap_or(f64::NAN)
        );
    }

    let mut cfg = ExperimentConfig::new(Suite::PnaKappa);
    cfg.instances_per_cell = 2;
    cfg.kappa = Some(vec![-0.5, 0.0, 0.5]);
    print!("{}", to_csv(&run_suite(&cfg)?));
    Ok(())
}
