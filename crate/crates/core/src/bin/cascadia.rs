//! Command-line front end. Every flag also reads `CASCADIA_<FLAG>`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use cascadia::evaluator::{eval_auto, eval_exact, eval_monte_carlo, Variant};
use cascadia::harness::{self, ExperimentConfig, Format, Suite, MC_FALLBACK_SAMPLES};
use cascadia::model::validate_instance;
use cascadia::policies::{default_rho_sweep, evaluate_output, run_policy, Diagnostics, PolicyKind, PolicySpec};
use cascadia::utility::{check_utility, ENUMERATION_LIMIT};
use cascadia::{CascadiaError, Instance, Result, Sequence, UtilityFunction};

#[derive(Parser)]
#[command(
    name = "cascadia",
    version,
    about = "Question selection and sequencing under the cascade browse model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one instance from an experiment config.
    Generate {
        #[arg(long, env = "CASCADIA_CONFIG")]
        config: Option<PathBuf>,
        #[arg(long, env = "CASCADIA_OUT")]
        out: Option<PathBuf>,
        /// Index into the config's feasible cells.
        #[arg(long, env = "CASCADIA_CELL", default_value_t = 0)]
        cell: usize,
        #[arg(long, env = "CASCADIA_INSTANCE_INDEX", default_value_t = 0)]
        instance_index: usize,
        #[arg(long, env = "CASCADIA_SEED")]
        seed: Option<u64>,
    },
    /// Run a policy on an instance.
    Solve {
        #[arg(long, env = "CASCADIA_INSTANCE")]
        instance: PathBuf,
        #[arg(long, env = "CASCADIA_POLICY", default_value = "alg2")]
        policy: PolicyKind,
        #[arg(long, env = "CASCADIA_RHO", default_value_t = 0.5)]
        rho: f64,
        /// Try rho in 0.1..0.9 and keep the best exact value.
        #[arg(long, env = "CASCADIA_RHO_SWEEP")]
        rho_sweep: bool,
        #[arg(long, env = "CASCADIA_DEPTH", default_value_t = 1)]
        depth: usize,
        #[arg(long, env = "CASCADIA_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "CASCADIA_VARIANT", value_parser = parse_variant)]
        variant: Option<Variant>,
        #[arg(long, env = "CASCADIA_KAPPA")]
        kappa: Option<f64>,
        #[arg(long, env = "CASCADIA_COMPUTE_CAP")]
        compute_cap: Option<f64>,
        #[arg(long, env = "CASCADIA_OUT")]
        out: Option<PathBuf>,
    },
    /// Evaluate a sequence on an instance.
    Eval {
        #[arg(long, env = "CASCADIA_INSTANCE")]
        instance: PathBuf,
        #[arg(long, env = "CASCADIA_SEQUENCE")]
        sequence: PathBuf,
        /// Monte Carlo sample count; exact evaluation when absent.
        #[arg(long, env = "CASCADIA_MC")]
        mc: Option<usize>,
        #[arg(long, env = "CASCADIA_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "CASCADIA_VARIANT", value_parser = parse_variant)]
        variant: Option<Variant>,
    },
    /// Run an experiment suite and write CSV and JSON results.
    Suite {
        #[arg(long, env = "CASCADIA_CONFIG")]
        config: Option<PathBuf>,
        /// Suite to run when no config is given.
        #[arg(long, env = "CASCADIA_SUITE", value_parser = parse_suite)]
        suite: Option<Suite>,
        #[arg(long, env = "CASCADIA_OUT", default_value = "results")]
        out: PathBuf,
        #[arg(long, env = "CASCADIA_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "CASCADIA_INSTANCES")]
        instances: Option<usize>,
        #[arg(long, env = "CASCADIA_COMPUTE_CAP")]
        compute_cap: Option<f64>,
        #[arg(long, env = "CASCADIA_FULL_PAPER")]
        full_paper: bool,
        #[arg(long, env = "CASCADIA_TIMING")]
        timing: bool,
        /// Only this format; both when absent.
        #[arg(long, env = "CASCADIA_FORMAT", value_parser = parse_format)]
        format: Option<Format>,
    },
    /// Validate an instance and check its utility for monotonicity and submodularity.
    Check {
        #[arg(long, env = "CASCADIA_INSTANCE")]
        instance: PathBuf,
        #[arg(long, env = "CASCADIA_EXHAUSTIVE_LIMIT", default_value_t = 12)]
        exhaustive_limit: usize,
        #[arg(long, env = "CASCADIA_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn parse_tag<T: for<'de> Deserialize<'de>>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    parse_tag(s)
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    parse_tag(s)
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    parse_tag(s)
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn write_or_print(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, body)?;
        }
        None => println!("{body}"),
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_json_str(&read(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Variant implied by the instance's optional data.
fn natural_variant(inst: &Instance) -> Variant {
    if inst.position_rates.is_some() {
        Variant::Scrolling
    } else if inst.slot_decay.is_some() {
        Variant::SlotDecay
    } else {
        Variant::Basic
    }
}

#[derive(Serialize)]
struct SolveDoc {
    policy: &'static str,
    /// External question ids in slot order.
    sequence: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_question_pna: Option<Vec<bool>>,
    surrogate_value: f64,
    f_value: f64,
    diagnostics: Diagnostics,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SequenceDoc {
    Bare(Vec<i64>),
    Wrapped { sequence: Vec<i64> },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            config,
            out,
            cell,
            instance_index,
            seed,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let cells = cfg.cells();
            let c = cells
                .get(cell)
                .ok_or_else(|| CascadiaError::Config(format!("cell {cell} out of range ({} cells)", cells.len())))?;
            let inst = harness::generate_instance(&cfg, c, harness::instance_seed(cfg.seed, cell, instance_index))?;
            write_or_print(out.as_deref(), &inst.to_json_string()?)
        }
        Command::Solve {
            instance,
            policy,
            rho,
            rho_sweep,
            depth,
            seed,
            variant,
            kappa,
            compute_cap,
            out,
        } => {
            let inst = Instance::from_json_str(&read(&instance)?)?;
            let g = UtilityFunction::from_instance(&inst)?;
            let mut spec = PolicySpec::new(policy).with_rho(rho).with_depth(depth).with_seed(seed);
            if rho_sweep {
                spec = spec.with_rho_sweep(default_rho_sweep());
            }
            if let Some(v) = variant {
                spec = spec.with_variant(v);
            }
            if let Some(k) = kappa {
                spec = spec.with_kappa(k);
            }
            if let Some(cap) = compute_cap {
                spec.compute_cap = cap;
            }
            let output = run_policy(&inst, &g, &spec)?;
            let f_value = evaluate_output(&inst, &g, &spec, &output)?.value;
            let doc = SolveDoc {
                policy: policy.name(),
                sequence: output.sequence.iter().map(|&q| inst.question_label(q)).collect(),
                per_question_pna: output.per_question_pna,
                surrogate_value: output.surrogate_value,
                f_value,
                diagnostics: output.diagnostics,
            };
            write_or_print(out.as_deref(), &serde_json::to_string_pretty(&doc)?)
        }
        Command::Eval {
            instance,
            sequence,
            mc,
            seed,
            variant,
        } => {
            let inst = Instance::from_json_str(&read(&instance)?)?;
            let labels = match serde_json::from_str::<SequenceDoc>(&read(&sequence)?)? {
                SequenceDoc::Bare(v) | SequenceDoc::Wrapped { sequence: v } => v,
            };
            let ids = labels
                .iter()
                .map(|&l| inst.question_by_label(l).ok_or(CascadiaError::UnknownQuestion(l)))
                .collect::<Result<Vec<_>>>()?;
            let seq = Sequence::new(ids, &inst)?;
            let g = UtilityFunction::from_instance(&inst)?;
            let variant = variant.unwrap_or_else(|| natural_variant(&inst));
            let report = match mc {
                Some(n) => eval_monte_carlo(&seq, &inst, &g, variant, n, seed)?,
                None if seq.len() <= cascadia::evaluator::EXACT_LIMIT => eval_exact(&seq, &inst, &g, variant)?,
                None => eval_auto(&seq, &inst, &g, variant, MC_FALLBACK_SAMPLES, seed)?,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Suite {
            config,
            suite,
            out,
            seed,
            instances,
            compute_cap,
            full_paper,
            timing,
            format,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if config.is_none() {
                cfg.suite = suite.unwrap_or(Suite::RatioTable2);
            } else if let Some(s) = suite {
                cfg.suite = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = instances {
                cfg.instances_per_cell = n;
            }
            if let Some(c) = compute_cap {
                cfg.compute_cap = c;
            }
            cfg.full_paper |= full_paper;
            cfg.timing |= timing;
            let res = harness::run_suite(&cfg)?;
            let formats = match format {
                Some(f) => vec![f],
                None => vec![Format::Csv, Format::Json],
            };
            for f in formats {
                let path = harness::emit(&res, &out, f)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Check {
            instance,
            exhaustive_limit,
            seed,
        } => {
            let doc: cascadia::model::InstanceDoc = serde_json::from_str(&read(&instance)?)?;
            let (inst, violations) = doc.to_instance_unchecked();
            if !violations.is_empty() {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "valid": false, "violations": list }))?
                );
                return Err(CascadiaError::Validation(violations));
            }
            debug_assert!(validate_instance(&inst).is_empty());
            let g = UtilityFunction::from_instance(&inst)?;
            let report = check_utility(&g, &inst, exhaustive_limit.min(ENUMERATION_LIMIT), seed);
            let body = json!({
                "valid": true,
                "guaranteed_submodular": g.guaranteed_submodular(),
                "utility": report,
            });
            println!("{}", serde_json::to_string_pretty(&body)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("CASCADIA_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
