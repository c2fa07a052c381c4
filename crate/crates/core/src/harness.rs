//! Seeded experiment suites over generated instances.
//!
//! Every instance seed is derived from the master seed, the cell index and
//! the instance index, so each cell reproduces on its own. Rows are sorted
//! before emission, so the worker count never changes output bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CascadiaError, Result};
use crate::evaluator::{eval_auto, Variant};
use crate::model::{Instance, Question, UtilityKind};
use crate::policies::{default_rho_sweep, evaluate_output, run_policy, PolicyKind, PolicySpec};
use crate::utility::UtilityFunction;

pub use crate::model::kappa_rate;

/// Monte Carlo sample count for sequences too long to evaluate exactly.
pub const MC_FALLBACK_SAMPLES: usize = 100_000;

/// CSV header of the result rows.
pub const CSV_HEADER: &str =
    "suite,cell_p_plus,cell_c_plus,cell_p_minus,cell_c_minus,kappa,seed,policy,f_value,method,ratio,runtime_ms";

const AGGREGATE_HEADER: &str = "suite,cell_p_plus,cell_c_plus,cell_p_minus,cell_c_minus,kappa,policy,count,f_min,f_mean,f_max,ratio_min,ratio_mean,ratio_max";

const KAPPA_HEADER: &str = "cell_p_plus,cell_c_plus,cell_p_minus,cell_c_minus,kappa,utility_with_pna,utility_without_pna,reduction,reduction_percent";

/// Parameter slack for the `p+ + p- <= 1` cell filter.
const FEASIBLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    SweepFig1,
    BenchmarkFig2,
    RatioTable2,
    RatioTable3,
    PnaKappa,
    Custom,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::SweepFig1 => "sweep_fig1",
            Suite::BenchmarkFig2 => "benchmark_fig2",
            Suite::RatioTable2 => "ratio_table2",
            Suite::RatioTable3 => "ratio_table3",
            Suite::PnaKappa => "pna_kappa",
            Suite::Custom => "custom",
        }
    }
}

/// Shared behavior parameters of every question in a generated instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub p_plus: f64,
    pub c_plus: f64,
    pub p_minus: f64,
    pub c_minus: f64,
}

impl Cell {
    pub fn new(p_plus: f64, c_plus: f64, p_minus: f64, c_minus: f64) -> Self {
        Self {
            p_plus,
            c_plus,
            p_minus,
            c_minus,
        }
    }

    pub fn feasible(&self) -> bool {
        self.p_plus + self.p_minus <= 1.0 + FEASIBLE_TOL
    }

    fn label(&self) -> String {
        format!(
            "p+={} c+={} p-={} c-={}",
            self.p_plus, self.c_plus, self.p_minus, self.c_minus
        )
    }
}

/// The four published with/without-PNA settings.
pub fn kappa_settings() -> Vec<Cell> {
    vec![
        Cell::new(0.3, 0.3, 0.1, 0.1),
        Cell::new(0.35, 0.35, 0.3, 0.3),
        Cell::new(0.4, 0.4, 0.5, 0.5),
        Cell::new(0.5, 0.5, 0.3, 0.3),
    ]
}

/// `-0.9, -0.7, -0.5, -0.3, -0.1, 0, 0.1, 0.3, 0.5, 0.7, 0.9`.
pub fn kappa_grid() -> Vec<f64> {
    [-9, -7, -5, -3, -1, 0, 1, 3, 5, 7, 9]
        .iter()
        .map(|&k| k as f64 / 10.0)
        .collect()
}

fn tenths(values: &[i32]) -> Vec<f64> {
    values.iter().map(|&v| v as f64 / 10.0).collect()
}

fn grid(full: bool) -> Vec<f64> {
    if full {
        tenths(&[1, 2, 3, 4, 5, 6, 7, 8, 9])
    } else {
        tenths(&[1, 3, 5, 7, 9])
    }
}

/// A named policy in a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub label: String,
    pub spec: PolicySpec,
}

impl PolicyEntry {
    pub fn new(label: &str, spec: PolicySpec) -> Self {
        Self {
            label: label.to_string(),
            spec,
        }
    }
}

/// The suites' QSS: the general algorithm, best exact value over `rho` in 0.1..0.9.
pub fn qss_spec() -> PolicySpec {
    PolicySpec::new(PolicyKind::Alg2General).with_rho_sweep(default_rho_sweep())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub n_questions: usize,
    pub n_choices: usize,
    pub budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_plus: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_plus: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_minus: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_minus: Option<Vec<f64>>,
    /// Explicit cells; replaces the grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<Cell>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
    pub instances_per_cell: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<PolicyEntry>>,
    pub compute_cap: f64,
    /// Full-scale grids (step 0.1) and 1000 instances per cell.
    pub full_paper: bool,
    /// Fill `runtime_ms`; makes output nondeterministic.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::new(Suite::RatioTable2)
    }
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            n_questions: 12,
            n_choices: 5,
            budget: 6,
            p_plus: None,
            c_plus: None,
            p_minus: None,
            c_minus: None,
            cells: None,
            kappa: None,
            instances_per_cell: 50,
            seed: 0,
            policies: None,
            compute_cap: crate::policies::DEFAULT_COMPUTE_CAP,
            full_paper: false,
            timing: false,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let grids = [&self.p_plus, &self.c_plus, &self.p_minus, &self.c_minus];
        for g in grids.into_iter().flatten() {
            if let Some(v) = g.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(CascadiaError::Config(format!("grid value {v} outside [0, 1]")));
            }
        }
        if let Some(k) = self.kappa.iter().flatten().find(|k| !(-1.0..=1.0).contains(*k)) {
            return Err(CascadiaError::InvalidKappa(*k));
        }
        if self.budget == 0 {
            return Err(CascadiaError::Config("budget must be at least 1".into()));
        }
        if self.n_choices == 0 {
            return Err(CascadiaError::Config("n_choices must be at least 1".into()));
        }
        Ok(())
    }

    fn axis(&self, given: &Option<Vec<f64>>, default: Vec<f64>) -> Vec<f64> {
        given.clone().unwrap_or(default)
    }

    /// Feasible cells in grid order.
    pub fn cells(&self) -> Vec<Cell> {
        if let Some(cells) = &self.cells {
            return cells.iter().copied().filter(Cell::feasible).collect();
        }
        if self.suite == Suite::PnaKappa {
            return kappa_settings();
        }
        let full = self.full_paper;
        let small = tenths(&[1, 5]);
        let (pp, cp, pm, cm) = match self.suite {
            Suite::SweepFig1 => (grid(full), grid(full), tenths(&[1, 2, 3, 4]), tenths(&[5])),
            Suite::BenchmarkFig2 => (grid(full), tenths(&[5]), tenths(&[1, 2, 3, 4]), tenths(&[5])),
            Suite::RatioTable3 => {
                let outer = if full { grid(true) } else { small.clone() };
                (outer.clone(), outer, grid(full), grid(full))
            }
            _ => {
                let inner = if full { grid(true) } else { small };
                (grid(full), grid(full), inner.clone(), inner)
            }
        };
        let (pp, cp, pm, cm) = (
            self.axis(&self.p_plus, pp),
            self.axis(&self.c_plus, cp),
            self.axis(&self.p_minus, pm),
            self.axis(&self.c_minus, cm),
        );
        let mut out = Vec::new();
        for &a in &pp {
            for &b in &cp {
                for &c in &pm {
                    for &d in &cm {
                        let cell = Cell::new(a, b, c, d);
                        if cell.feasible() {
                            out.push(cell);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.kappa.clone().unwrap_or_else(kappa_grid)
    }

    pub fn instances(&self) -> usize {
        if self.full_paper {
            1000
        } else {
            self.instances_per_cell
        }
    }

    /// Policies compared by the suite.
    pub fn policy_entries(&self) -> Vec<PolicyEntry> {
        if let Some(p) = &self.policies {
            return p.clone();
        }
        let opt = PolicySpec {
            compute_cap: self.compute_cap,
            ..PolicySpec::new(PolicyKind::ExactOptimal)
        };
        match self.suite {
            Suite::SweepFig1 | Suite::Custom => vec![PolicyEntry::new("qss", qss_spec())],
            Suite::BenchmarkFig2 => vec![
                PolicyEntry::new("qss", qss_spec()),
                PolicyEntry::new("max_ent", PolicySpec::new(PolicyKind::MaxEnt)),
                PolicyEntry::new("random", PolicySpec::new(PolicyKind::Random)),
            ],
            Suite::RatioTable2 | Suite::RatioTable3 => {
                vec![PolicyEntry::new("qss", qss_spec()), PolicyEntry::new("opt", opt)]
            }
            Suite::PnaKappa => vec![
                PolicyEntry::new("opt_pna", opt.clone()),
                PolicyEntry::new("opt_no_pna", opt),
            ],
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Per-instance seed from the master seed and the (cell, instance) counter.
pub fn instance_seed(master: u64, cell: usize, instance: usize) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(cell as u64)) ^ instance as u64)
}

/// One fresh attribute per question with `n_choices` values drawn uniformly
/// and normalized; every question carries the cell's parameters.
pub fn generate_instance(cfg: &ExperimentConfig, cell: &Cell, seed: u64) -> Result<Instance> {
    if !cell.feasible() {
        return Err(CascadiaError::InfeasibleCell(cell.p_plus + cell.p_minus));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attributes: Vec<Vec<f64>> = (0..cfg.n_questions)
        .map(|_| normalized(&mut rng, cfg.n_choices))
        .collect();
    let questions = (0..cfg.n_questions)
        .map(|i| Question::new(i, cell.p_plus, cell.p_minus, cell.c_plus, cell.c_minus).with_attributes(vec![i]))
        .collect();
    Ok(Instance::new(questions, attributes, cfg.budget, UtilityKind::Entropy))
}

fn normalized(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            return raw.into_iter().map(|x| x / total).collect();
        }
    }
}

/// Heterogeneous entropy instance: per-question random parameters, each
/// question covering one or two of `n` shared attributes with 2 to 5 values.
pub fn random_instance(n: usize, budget: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attributes: Vec<Vec<f64>> = (0..n.max(1))
        .map(|_| {
            let k = rng.gen_range(2..=5);
            normalized(&mut rng, k)
        })
        .collect();
    let questions = (0..n)
        .map(|i| {
            let p = rng.gen::<f64>();
            let pm = rng.gen::<f64>() * (1.0 - p);
            let mut attrs = vec![i];
            if rng.gen_bool(0.4) {
                let other = rng.gen_range(0..n);
                if other != i {
                    attrs.push(other);
                }
            }
            Question::new(i, p, pm, rng.gen(), rng.gen()).with_attributes(attrs)
        })
        .collect();
    Instance::new(questions, attributes, budget, UtilityKind::Entropy)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub suite: String,
    pub cell_p_plus: f64,
    pub cell_c_plus: f64,
    pub cell_p_minus: f64,
    pub cell_c_minus: f64,
    pub kappa: Option<f64>,
    pub seed: u64,
    pub policy: String,
    pub f_value: f64,
    pub method: String,
    pub ratio: Option<f64>,
    pub runtime_ms: Option<f64>,
}

impl ResultRow {
    pub fn cell(&self) -> Cell {
        Cell::new(self.cell_p_plus, self.cell_c_plus, self.cell_p_minus, self.cell_c_minus)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub suite: String,
    pub cell_p_plus: f64,
    pub cell_c_plus: f64,
    pub cell_p_minus: f64,
    pub cell_c_minus: f64,
    pub kappa: Option<f64>,
    pub policy: String,
    pub count: usize,
    pub f_min: f64,
    pub f_mean: f64,
    pub f_max: f64,
    pub ratio_min: Option<f64>,
    pub ratio_mean: Option<f64>,
    pub ratio_max: Option<f64>,
}

/// Mean optimal utility with and without PNA at one `kappa`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaSummary {
    pub cell: Cell,
    pub kappa: f64,
    pub utility_with_pna: f64,
    pub utility_without_pna: f64,
    pub reduction: f64,
    pub reduction_percent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappa_summary: Vec<KappaSummary>,
}

/// Sort key: cell index, instance index, kappa index, policy index.
type RowKey = (usize, usize, usize, usize);

struct Job<'a> {
    cfg: &'a ExperimentConfig,
    suite: &'a str,
    cell: Cell,
    seed: u64,
}

impl Job<'_> {
    fn row(&self, kappa: Option<f64>, policy: &str, f: f64, method: &str, ms: Option<f64>) -> ResultRow {
        ResultRow {
            suite: self.suite.to_string(),
            cell_p_plus: self.cell.p_plus,
            cell_c_plus: self.cell.c_plus,
            cell_p_minus: self.cell.p_minus,
            cell_c_minus: self.cell.c_minus,
            kappa,
            seed: self.seed,
            policy: policy.to_string(),
            f_value: f,
            method: method.to_string(),
            ratio: None,
            runtime_ms: if self.cfg.timing { ms } else { None },
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e3))
}

fn run_policies(job: &Job<'_>, inst: &Instance, entries: &[PolicyEntry]) -> Result<Vec<(RowKey, ResultRow)>> {
    let g = UtilityFunction::from_instance(inst)?;
    let mut rows = Vec::with_capacity(entries.len());
    for (pi, entry) in entries.iter().enumerate() {
        let mut spec = entry.spec.clone();
        if matches!(spec.kind, PolicyKind::Random | PolicyKind::MaxEnt) {
            spec.seed = splitmix64(job.seed ^ spec.seed);
        }
        let (out, ms) = timed(|| run_policy(inst, &g, &spec))?;
        let report = match spec.kind {
            PolicyKind::Alg5PnaDecision | PolicyKind::Alg3DecayNoPna => evaluate_output(inst, &g, &spec, &out)?,
            _ => eval_auto(&out.seq(), inst, &g, spec.eval_variant(), MC_FALLBACK_SAMPLES, job.seed)?,
        };
        rows.push((
            (0, 0, 0, pi),
            job.row(None, &entry.label, report.value, report.method.name(), Some(ms)),
        ));
    }
    // Ratios against the exact optimum when one is among the policies.
    let opt = entries
        .iter()
        .position(|e| e.spec.kind == PolicyKind::ExactOptimal)
        .map(|i| rows[i].1.f_value);
    if let Some(opt) = opt {
        for (_, r) in &mut rows {
            r.ratio = Some(if opt > 0.0 { r.f_value / opt } else { 1.0 });
        }
    }
    Ok(rows)
}

fn run_kappa(job: &Job<'_>, inst: &Instance, kappas: &[f64], cap: f64) -> Result<Vec<(RowKey, ResultRow)>> {
    let g = UtilityFunction::from_instance(inst)?;
    let opt = |i: &Instance| crate::policies::exact_optimal(i, &g, Variant::Basic, cap);
    let (with, ms) = timed(|| opt(inst))?;
    let mut rows = vec![(
        (0, 0, 0, 0),
        job.row(None, "opt_pna", with.surrogate_value, "exact", Some(ms)),
    )];
    for (ki, &k) in kappas.iter().enumerate() {
        let without_inst = inst.apply_kappa(k)?;
        let (without, ms) = timed(|| opt(&without_inst))?;
        rows.push((
            (0, 0, ki + 1, 1),
            job.row(Some(k), "opt_no_pna", without.surrogate_value, "exact", Some(ms)),
        ));
    }
    Ok(rows)
}

/// Runs every cell and instance of the configured suite.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    cfg.validate()?;
    let suite = cfg.suite.name();
    let cells = cfg.cells();
    let entries = cfg.policy_entries();
    let kappas = cfg.kappas();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.instances()).map(move |i| (c, i)))
        .collect();
    let per_job: Vec<Vec<(RowKey, ResultRow)>> = jobs
        .par_iter()
        .map(|&(ci, ii)| {
            let job = Job {
                cfg,
                suite,
                cell: cells[ci],
                seed: instance_seed(cfg.seed, ci, ii),
            };
            let inst = generate_instance(cfg, &job.cell, job.seed)?;
            let rows = if cfg.suite == Suite::PnaKappa {
                run_kappa(&job, &inst, &kappas, cfg.compute_cap)
            } else {
                run_policies(&job, &inst, &entries)
            };
            rows.map(|rs| rs.into_iter().map(|((_, _, k, p), r)| ((ci, ii, k, p), r)).collect())
                .map_err(|e| CascadiaError::InCell {
                    cell: job.cell.label(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut keyed: Vec<(RowKey, ResultRow)> = per_job.into_iter().flatten().collect();
    keyed.sort_by_key(|(k, _)| *k);
    let rows: Vec<ResultRow> = keyed.into_iter().map(|(_, r)| r).collect();
    let aggregates = aggregate(&rows);
    let kappa_summary = if cfg.suite == Suite::PnaKappa {
        kappa_summaries(&rows)
    } else {
        Vec::new()
    };
    Ok(SuiteResult {
        suite: suite.to_string(),
        rows,
        aggregates,
        kappa_summary,
    })
}

fn same_group(a: &ResultRow, b: &ResultRow) -> bool {
    a.cell() == b.cell() && a.kappa == b.kappa && a.policy == b.policy
}

/// Min, mean and max per (cell, kappa, policy), in first-appearance order.
pub fn aggregate(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut groups: Vec<Vec<&ResultRow>> = Vec::new();
    for r in rows {
        match groups.iter_mut().find(|g| same_group(g[0], r)) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let f: Vec<f64> = g.iter().map(|r| r.f_value).collect();
            let ratios: Vec<f64> = g.iter().filter_map(|r| r.ratio).collect();
            let stats = |v: &[f64]| {
                (
                    v.iter().copied().fold(f64::INFINITY, f64::min),
                    v.iter().sum::<f64>() / v.len() as f64,
                    v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            let (f_min, f_mean, f_max) = stats(&f);
            let r = (!ratios.is_empty()).then(|| stats(&ratios));
            let first = g[0];
            Aggregate {
                suite: first.suite.clone(),
                cell_p_plus: first.cell_p_plus,
                cell_c_plus: first.cell_c_plus,
                cell_p_minus: first.cell_p_minus,
                cell_c_minus: first.cell_c_minus,
                kappa: first.kappa,
                policy: first.policy.clone(),
                count: g.len(),
                f_min,
                f_mean,
                f_max,
                ratio_min: r.map(|x| x.0),
                ratio_mean: r.map(|x| x.1),
                ratio_max: r.map(|x| x.2),
            }
        })
        .collect()
}

/// Reduction and reduction percentage of the cell means per `kappa`.
pub fn kappa_summaries(rows: &[ResultRow]) -> Vec<KappaSummary> {
    let aggs = aggregate(rows);
    let mut out = Vec::new();
    for with in aggs.iter().filter(|a| a.policy == "opt_pna") {
        let cell = Cell::new(with.cell_p_plus, with.cell_c_plus, with.cell_p_minus, with.cell_c_minus);
        for without in aggs.iter().filter(|a| {
            a.policy == "opt_no_pna" && Cell::new(a.cell_p_plus, a.cell_c_plus, a.cell_p_minus, a.cell_c_minus) == cell
        }) {
            let reduction = with.f_mean - without.f_mean;
            out.push(KappaSummary {
                cell,
                kappa: without.kappa.unwrap_or(f64::NAN),
                utility_with_pna: with.f_mean,
                utility_without_pna: without.f_mean,
                reduction,
                reduction_percent: if with.f_mean > 0.0 {
                    100.0 * reduction / with.f_mean
                } else {
                    0.0
                },
            });
        }
    }
    out
}

fn opt_str(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV text: header and rows, then `aggregates` (and `kappa_summary`) blocks.
pub fn to_csv(res: &SuiteResult) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &res.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.suite,
            r.cell_p_plus,
            r.cell_c_plus,
            r.cell_p_minus,
            r.cell_c_minus,
            opt_str(r.kappa),
            r.seed,
            r.policy,
            r.f_value,
            r.method,
            opt_str(r.ratio),
            opt_str(r.runtime_ms)
        );
    }
    if res.rows.is_empty() {
        return s;
    }
    s.push_str("\naggregates\n");
    s.push_str(AGGREGATE_HEADER);
    s.push('\n');
    for a in &res.aggregates {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            a.suite,
            a.cell_p_plus,
            a.cell_c_plus,
            a.cell_p_minus,
            a.cell_c_minus,
            opt_str(a.kappa),
            a.policy,
            a.count,
            a.f_min,
            a.f_mean,
            a.f_max,
            opt_str(a.ratio_min),
            opt_str(a.ratio_mean),
            opt_str(a.ratio_max)
        );
    }
    if !res.kappa_summary.is_empty() {
        s.push_str("\nkappa_summary\n");
        s.push_str(KAPPA_HEADER);
        s.push('\n');
        for k in &res.kappa_summary {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                k.cell.p_plus,
                k.cell.c_plus,
                k.cell.p_minus,
                k.cell.c_minus,
                k.kappa,
                k.utility_with_pna,
                k.utility_without_pna,
                k.reduction,
                k.reduction_percent
            );
        }
    }
    s
}

pub fn to_json(res: &SuiteResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(res)? + "\n")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Writes `<suite>.csv` or `<suite>.json` into `dir`, creating it if needed.
pub fn emit(res: &SuiteResult, dir: &Path, format: Format) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let (path, body) = match format {
        Format::Csv => (dir.join(format!("{}.csv", res.suite)), to_csv(res)),
        Format::Json => (dir.join(format!("{}.json", res.suite)), to_json(res)?),
    };
    fs::write(&path, body)?;
    Ok(path)
}
