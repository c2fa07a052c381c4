//! Sequence builders: the QSS family, baselines, and the exact optimum.
//!
//! Every QSS variant enumerates a trailing question `q` (and, with slot
//! decay, the slot `t` it lands in), solves a constrained selection problem
//! for the questions placed before it, and keeps the best candidate. The
//! knapsack `sum -ln(c) <= -ln rho` keeps every slot reachable with
//! probability at least `rho`.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CascadiaError, Result};
use crate::evaluator::{
    check_variant, collapse_copies, eval_exact, has_closed_form, slot_params, Cascade, CopySemantics, EvalReport,
    Expectation, VMode, Variant, VirtualQuestion,
};
use crate::model::{Instance, QuestionId, Sequence};
use crate::solvers::{
    greedy_knapsack, greedy_matroid_knapsack, greedy_partition, log_weight, ConstraintSet, BRUTE_FORCE_LIMIT,
};
use crate::utility::{UtilityFunction, ENUMERATION_LIMIT};

/// Default refusal threshold for [`exact_optimal`], in cascade-state updates.
pub const DEFAULT_COMPUTE_CAP: f64 = 1e9;

/// Values closer than this count as tied.
const TIE_TOL: f64 = 1e-12;
/// Slack on the branch-and-bound pruning test.
const PRUNE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    #[serde(alias = "alg1")]
    Alg1NoPna,
    #[serde(alias = "alg2", alias = "qss")]
    Alg2General,
    #[serde(alias = "alg3")]
    Alg3DecayNoPna,
    #[serde(alias = "alg4")]
    Alg4DecayPna,
    #[serde(alias = "alg5")]
    Alg5PnaDecision,
    #[serde(alias = "alg6")]
    Alg6Scrolling,
    Random,
    #[serde(alias = "maxent")]
    MaxEnt,
    #[serde(alias = "opt", alias = "exact")]
    ExactOptimal,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Alg1NoPna => "alg1_no_pna",
            PolicyKind::Alg2General => "alg2_general",
            PolicyKind::Alg3DecayNoPna => "alg3_decay_no_pna",
            PolicyKind::Alg4DecayPna => "alg4_decay_pna",
            PolicyKind::Alg5PnaDecision => "alg5_pna_decision",
            PolicyKind::Alg6Scrolling => "alg6_scrolling",
            PolicyKind::Random => "random",
            PolicyKind::MaxEnt => "max_ent",
            PolicyKind::ExactOptimal => "exact_optimal",
        }
    }

    /// Whether the kind takes a `rho`.
    pub fn uses_rho(self) -> bool {
        matches!(
            self,
            PolicyKind::Alg1NoPna
                | PolicyKind::Alg2General
                | PolicyKind::Alg3DecayNoPna
                | PolicyKind::Alg4DecayPna
                | PolicyKind::Alg5PnaDecision
        )
    }

    /// Behavior model the kind's output is scored under.
    pub fn default_variant(self) -> Variant {
        match self {
            PolicyKind::Alg1NoPna => Variant::NoPna,
            PolicyKind::Alg3DecayNoPna | PolicyKind::Alg4DecayPna => Variant::SlotDecay,
            PolicyKind::Alg6Scrolling => Variant::Scrolling,
            _ => Variant::Basic,
        }
    }
}

impl FromStr for PolicyKind {
    type Err = CascadiaError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| CascadiaError::Config(format!("unknown policy `{s}`")))
    }
}

/// Inner solver configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerConfig {
    /// Partial-enumeration depth of the knapsack greedy.
    pub enum_depth: usize,
    /// Swap local search after matroid greedy.
    pub local_search: bool,
    pub v_mode: VMode,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            enum_depth: 1,
            local_search: true,
            v_mode: VMode::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub rho: f64,
    /// When set, every listed `rho` is tried and the best exact value wins.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_sweep: Option<Vec<f64>>,
    pub inner: InnerConfig,
    /// Random-order seed for the random and max-entropy baselines.
    pub seed: u64,
    pub compute_cap: f64,
    /// Overrides the kind's scoring variant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    /// Without-PNA answer-rate shift for the PNA-decision policy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self::new(PolicyKind::Alg2General)
    }
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            rho: 0.5,
            rho_sweep: None,
            inner: InnerConfig::default(),
            seed: 0,
            compute_cap: DEFAULT_COMPUTE_CAP,
            variant: None,
            kappa: None,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_rho_sweep(mut self, rhos: Vec<f64>) -> Self {
        self.rho_sweep = Some(rhos);
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.inner.enum_depth = depth;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = Some(variant);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn eval_variant(&self) -> Variant {
        self.variant.unwrap_or_else(|| self.kind.default_variant())
    }
}

/// `rho` in `0.1, 0.2, ..., 0.9`.
pub fn default_rho_sweep() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Trailing question of the winning candidate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_prime: Option<QuestionId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_size: Option<usize>,
    /// 1-based slot of the trailing question, decay variants only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_prime: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enum_depth: Option<usize>,
    /// Objective oracle calls, or search nodes for the exact optimum.
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutput {
    pub sequence: Vec<QuestionId>,
    /// Per slot: whether PNA is offered. PNA-decision policy only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_question_pna: Option<Vec<bool>>,
    /// `u` or `v` at the chosen candidate.
    pub surrogate_value: f64,
    pub diagnostics: Diagnostics,
}

impl PolicyOutput {
    fn empty() -> Self {
        Self {
            sequence: Vec::new(),
            per_question_pna: None,
            surrogate_value: 0.0,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn seq(&self) -> Sequence {
        Sequence::from_slots(self.sequence.clone())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(CascadiaError::InvalidRho(rho))
    }
}

/// `E[g(R)]` over `items` must be computable for every candidate.
fn check_expectable(g: &UtilityFunction, inner: &InnerConfig, items: usize) -> Result<()> {
    if inner.v_mode == VMode::Exact && !has_closed_form(g) && items > ENUMERATION_LIMIT {
        return Err(CascadiaError::ExactLimit {
            size: items,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

struct Candidate {
    value: f64,
    q: usize,
    t: usize,
    items: Vec<usize>,
    evaluations: usize,
}

/// Highest value; ties go to the lowest `q`, then the lowest `t`.
fn pick(mut cands: Vec<Candidate>) -> Option<(Candidate, usize)> {
    let evaluations = cands.iter().map(|c| c.evaluations).sum();
    cands.sort_by_key(|c| (c.q, c.t));
    let mut best: Option<Candidate> = None;
    for c in cands {
        if best.as_ref().is_none_or(|b| c.value > b.value) {
            best = Some(c);
        }
    }
    best.map(|b| (b, evaluations))
}

fn qss_output(best: Candidate, evaluations: usize, rho: f64, depth: Option<usize>, t: bool) -> PolicyOutput {
    let mut sequence = best.items.clone();
    sequence.sort_unstable();
    sequence.push(best.q);
    PolicyOutput {
        diagnostics: Diagnostics {
            q_prime: Some(best.q),
            s_size: Some(best.items.len()),
            t_prime: t.then_some(best.t),
            rho: Some(rho),
            enum_depth: depth,
            evaluations,
        },
        sequence,
        per_question_pna: None,
        surrogate_value: best.value,
    }
}

/// QSS without PNA: objective `u`, weights `-ln(p+ c+)`. PNA is ignored.
pub fn alg1_no_pna(inst: &Instance, g: &UtilityFunction, rho: f64, inner: &InnerConfig) -> Result<PolicyOutput> {
    check_rho(rho)?;
    let (n, b) = (inst.n(), inst.max_len());
    if b == 0 {
        return Ok(PolicyOutput::empty());
    }
    let cont: Vec<f64> = inst.questions.iter().map(|q| q.p_answer * q.c_answer).collect();
    let ground: Vec<usize> = (0..n).collect();
    let cands = (0..n)
        .into_par_iter()
        .map(|q| {
            let cons = ConstraintSet::from_continuations(&cont, rho, b - 1).with_excluded(q);
            let a = inst.question(q).p_answer;
            let res = greedy_knapsack(|s| g.value(s) + a * g.gain(s, q), &ground, &cons, inner.enum_depth);
            Candidate {
                value: res.objective,
                q,
                t: 0,
                items: res.items,
                evaluations: res.evaluations,
            }
        })
        .collect();
    let (best, evals) = pick(cands).expect("nonempty instance");
    Ok(qss_output(best, evals, rho, Some(inner.enum_depth), false))
}

/// QSS: objective `v`, weights `-ln(c)` with the aggregated continuation.
pub fn alg2_general(inst: &Instance, g: &UtilityFunction, rho: f64, inner: &InnerConfig) -> Result<PolicyOutput> {
    check_rho(rho)?;
    let (n, b) = (inst.n(), inst.max_len());
    if b == 0 {
        return Ok(PolicyOutput::empty());
    }
    check_expectable(g, inner, b)?;
    let exp = Expectation::new(inner.v_mode, n);
    let cont: Vec<f64> = inst.questions.iter().map(|q| q.agg_continuation()).collect();
    let rates: Vec<f64> = inst.questions.iter().map(|q| q.p_answer).collect();
    let ground: Vec<usize> = (0..n).collect();
    let cands = (0..n)
        .into_par_iter()
        .map(|q| {
            let cons = ConstraintSet::from_continuations(&cont, rho, b - 1).with_excluded(q);
            let v = |s: &[usize]| {
                let mut items = s.to_vec();
                items.push(q);
                let probs: Vec<f64> = items.iter().map(|&i| rates[i]).collect();
                exp.expect(g, &items, &probs).expect("checked expectable")
            };
            let res = greedy_knapsack(v, &ground, &cons, inner.enum_depth);
            Candidate {
                value: res.objective,
                q,
                t: 0,
                items: res.items,
                evaluations: res.evaluations,
            }
        })
        .collect();
    let (best, evals) = pick(cands).expect("nonempty instance");
    Ok(qss_output(best, evals, rho, Some(inner.enum_depth), false))
}

fn decay_of(inst: &Instance, b: usize) -> Result<&[f64]> {
    check_variant(inst, Variant::SlotDecay, b)?;
    Ok(inst.slot_decay.as_deref().expect("checked"))
}

/// Slot-decay QSS without PNA; also enumerates the trailing slot `t`.
pub fn alg3_decay_no_pna(inst: &Instance, g: &UtilityFunction, rho: f64, inner: &InnerConfig) -> Result<PolicyOutput> {
    check_rho(rho)?;
    let (n, b) = (inst.n(), inst.max_len());
    let decay = decay_of(inst, b)?;
    if b == 0 {
        return Ok(PolicyOutput::empty());
    }
    let cont: Vec<f64> = inst.questions.iter().map(|q| q.p_answer * q.c_answer).collect();
    let ground: Vec<usize> = (0..n).collect();
    let pairs: Vec<(usize, usize)> = (1..=b).flat_map(|t| (0..n).map(move |q| (t, q))).collect();
    let cands: Vec<Candidate> = pairs
        .into_par_iter()
        .filter_map(|(t, q)| {
            let big_lambda: f64 = decay[..t].iter().product();
            let budget = -rho.ln() + big_lambda.ln();
            if budget < -TIE_TOL {
                return None;
            }
            let mut cons = ConstraintSet::from_continuations(&cont, rho, t - 1).with_excluded(q);
            cons.log_budget = budget.max(0.0);
            let a = decay[t - 1] * inst.question(q).p_answer;
            let res = greedy_knapsack(|s| g.value(s) + a * g.gain(s, q), &ground, &cons, inner.enum_depth);
            Some(Candidate {
                value: res.objective,
                q,
                t,
                items: res.items,
                evaluations: res.evaluations,
            })
        })
        .collect();
    match pick(cands) {
        Some((best, evals)) => Ok(qss_output(best, evals, rho, Some(inner.enum_depth), true)),
        None => Ok(PolicyOutput::empty()),
    }
}

/// Questions in slot order after keeping one copy per question (the
/// lowest slot) and closing gaps.
fn refine_copies(mut copies: Vec<VirtualQuestion>) -> Vec<QuestionId> {
    copies.sort_by_key(|c| (c.slot, c.question));
    let mut seq = Vec::with_capacity(copies.len());
    for c in copies {
        if !seq.contains(&c.question) {
            seq.push(c.question);
        }
    }
    seq
}

/// Slot-decay QSS with PNA over virtual `(question, slot)` copies.
pub fn alg4_decay_pna(inst: &Instance, g: &UtilityFunction, rho: f64, inner: &InnerConfig) -> Result<PolicyOutput> {
    check_rho(rho)?;
    let (n, b) = (inst.n(), inst.max_len());
    let decay = decay_of(inst, b)?;
    if b == 0 {
        return Ok(PolicyOutput::empty());
    }
    check_expectable(g, inner, b)?;
    let exp = Expectation::new(inner.v_mode, n);
    let sem = CopySemantics::MinSlotDecay(decay);
    // Virtual item id = slot * n + question.
    let weights: Vec<f64> = (0..b * n)
        .map(|id| {
            let (slot, q) = (id / n, inst.question(id % n));
            log_weight(decay[slot] * q.p_answer * q.c_answer + q.p_pna * q.c_pna)
        })
        .collect();
    let classes: Vec<usize> = (0..b * n).map(|id| id / n).collect();
    let pairs: Vec<(usize, usize)> = (1..=b).flat_map(|t| (0..n).map(move |q| (t, q))).collect();
    let cands = pairs
        .into_par_iter()
        .map(|(t, q)| {
            let ground: Vec<usize> = (0..(t - 1) * n).filter(|id| id % n != q).collect();
            let cons = ConstraintSet {
                log_budget: -rho.ln(),
                item_weights: weights.clone(),
                cardinality: t - 1,
                partition_classes: Some(classes.clone()),
                excluded: None,
            };
            let v = |s: &[usize]| {
                let mut copies: Vec<VirtualQuestion> = s
                    .iter()
                    .map(|&id| VirtualQuestion {
                        question: id % n,
                        slot: id / n,
                    })
                    .collect();
                copies.push(VirtualQuestion {
                    question: q,
                    slot: t - 1,
                });
                let (items, probs) = collapse_copies(inst, &copies, sem);
                exp.expect(g, &items, &probs).expect("checked expectable")
            };
            let res = greedy_matroid_knapsack(v, &ground, &cons, inner.local_search);
            Candidate {
                value: res.objective,
                q,
                t,
                items: res.items,
                evaluations: res.evaluations,
            }
        })
        .collect();
    let (best, evals) = pick(cands).expect("nonempty instance");
    let mut copies: Vec<VirtualQuestion> = best
        .items
        .iter()
        .map(|&id| VirtualQuestion {
            question: id % n,
            slot: id / n,
        })
        .collect();
    copies.push(VirtualQuestion {
        question: best.q,
        slot: best.t - 1,
    });
    Ok(PolicyOutput {
        sequence: refine_copies(copies),
        per_question_pna: None,
        surrogate_value: best.value,
        diagnostics: Diagnostics {
            q_prime: Some(best.q),
            s_size: Some(best.items.len()),
            t_prime: Some(best.t),
            rho: Some(rho),
            enum_depth: None,
            evaluations: evals,
        },
    })
}

/// `with` where each `(question, pna)` pair without PNA takes `without`'s parameters.
pub fn apply_pna_choice(with: &Instance, without: &Instance, seq: &[QuestionId], pna: &[bool]) -> Instance {
    let mut out = with.clone();
    for (&q, &offered) in seq.iter().zip(pna) {
        if !offered {
            let w = without.question(q);
            let target = &mut out.questions[q];
            target.p_answer = w.p_answer;
            target.c_answer = w.c_answer;
            target.p_pna = 0.0;
            target.c_pna = 0.0;
        }
    }
    out
}

/// QSS with PNA as a decision: each question has a with-PNA version (from
/// `with`) and a without-PNA version (from `without`); at most one is used.
pub fn alg5_pna_decision(
    with: &Instance,
    without: &Instance,
    g: &UtilityFunction,
    rho: f64,
    inner: &InnerConfig,
) -> Result<PolicyOutput> {
    check_rho(rho)?;
    if without.n() != with.n() {
        return Err(CascadiaError::MissingData {
            variant: "alg5_pna_decision",
            what: "without-PNA parameters for every question",
        });
    }
    let (n, b) = (with.n(), with.max_len());
    if b == 0 {
        return Ok(PolicyOutput::empty());
    }
    check_expectable(g, inner, b)?;
    let exp = Expectation::new(inner.v_mode, n);
    // Item id q: with PNA; n + q: without.
    let version = |id: usize| {
        if id < n {
            with.question(id)
        } else {
            without.question(id - n)
        }
    };
    let weights: Vec<f64> = (0..2 * n)
        .map(|id| {
            let q = version(id);
            if id < n {
                log_weight(q.agg_continuation())
            } else {
                log_weight(q.p_answer * q.c_answer)
            }
        })
        .collect();
    let rates: Vec<f64> = (0..2 * n).map(|id| version(id).p_answer).collect();
    let classes: Vec<usize> = (0..2 * n).map(|id| id % n).collect();
    let cands = (0..2 * n)
        .into_par_iter()
        .map(|a| {
            let ground: Vec<usize> = (0..2 * n).filter(|id| id % n != a % n).collect();
            let cons = ConstraintSet {
                log_budget: -rho.ln(),
                item_weights: weights.clone(),
                cardinality: b - 1,
                partition_classes: Some(classes.clone()),
                excluded: None,
            };
            let v = |s: &[usize]| {
                let mut ids = s.to_vec();
                ids.push(a);
                let items: Vec<usize> = ids.iter().map(|&id| id % n).collect();
                let probs: Vec<f64> = ids.iter().map(|&id| rates[id]).collect();
                exp.expect(g, &items, &probs).expect("checked expectable")
            };
            let res = greedy_matroid_knapsack(v, &ground, &cons, inner.local_search);
            // t carries the version so that ties prefer offering PNA.
            Candidate {
                value: res.objective,
                q: a % n,
                t: a / n,
                items: res.items,
                evaluations: res.evaluations,
            }
        })
        .collect();
    let (best, evals) = pick(cands).expect("nonempty instance");
    let mut prefix: Vec<(usize, bool)> = best.items.iter().map(|&id| (id % n, id < n)).collect();
    prefix.sort_unstable();
    prefix.push((best.q, best.t == 0));
    let (sequence, pna): (Vec<usize>, Vec<bool>) = prefix.into_iter().unzip();
    Ok(PolicyOutput {
        sequence,
        per_question_pna: Some(pna),
        surrogate_value: best.value,
        diagnostics: Diagnostics {
            q_prime: Some(best.q),
            s_size: Some(best.items.len()),
            t_prime: None,
            rho: Some(rho),
            enum_depth: None,
            evaluations: evals,
        },
    })
}

/// Scrolling design: greedy over `(question, slot)` pairs, one per slot.
pub fn alg6_scrolling(inst: &Instance, g: &UtilityFunction, inner: &InnerConfig) -> Result<PolicyOutput> {
    let (n, b) = (inst.n(), inst.max_len());
    check_variant(inst, Variant::Scrolling, b)?;
    if b == 0 {
        return Ok(PolicyOutput::empty());
    }
    check_expectable(g, inner, b)?;
    let rates = inst.position_rates.as_deref().expect("checked");
    let sem = CopySemantics::MaxRate(rates);
    let exp = Expectation::new(inner.v_mode, n);
    let value = |copies: &[VirtualQuestion]| {
        let (items, probs) = collapse_copies(inst, copies, sem);
        exp.expect(g, &items, &probs).expect("checked expectable")
    };
    let to_copy = |id: usize| VirtualQuestion {
        question: id % n,
        slot: id / n,
    };
    let ground: Vec<usize> = (0..b * n).collect();
    let classes: Vec<usize> = (0..b * n).map(|id| id / n).collect();
    let res = greedy_partition(
        |s: &[usize]| value(&s.iter().map(|&id| to_copy(id)).collect::<Vec<_>>()),
        &ground,
        &classes,
        b,
    );
    // Keep each question's highest-rate copy (lowest slot on ties).
    let mut slots: Vec<Option<QuestionId>> = vec![None; b];
    let mut copies: Vec<VirtualQuestion> = res.items.iter().map(|&id| to_copy(id)).collect();
    copies.sort_by(|x, y| {
        rates[y.question][y.slot]
            .total_cmp(&rates[x.question][x.slot])
            .then(x.slot.cmp(&y.slot))
    });
    for c in copies {
        if !slots.contains(&Some(c.question)) {
            slots[c.slot] = Some(c.question);
        }
    }
    // Refill freed slots with the best unused question.
    for slot in 0..b {
        if slots[slot].is_some() {
            continue;
        }
        let placed: Vec<VirtualQuestion> = slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|q| VirtualQuestion { question: q, slot: i }))
            .collect();
        let mut best: Option<(f64, QuestionId)> = None;
        for q in 0..n {
            if slots.contains(&Some(q)) {
                continue;
            }
            let mut trial = placed.clone();
            trial.push(VirtualQuestion { question: q, slot });
            let v = value(&trial);
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, q));
            }
        }
        slots[slot] = best.map(|(_, q)| q);
    }
    let sequence: Vec<QuestionId> = slots.into_iter().flatten().collect();
    let final_copies: Vec<VirtualQuestion> = sequence
        .iter()
        .enumerate()
        .map(|(slot, &question)| VirtualQuestion { question, slot })
        .collect();
    Ok(PolicyOutput {
        surrogate_value: value(&final_copies),
        sequence,
        per_question_pna: None,
        diagnostics: Diagnostics {
            evaluations: res.evaluations,
            ..Diagnostics::default()
        },
    })
}

/// Uniform random `min(b, n)` questions in uniform random order.
pub fn baseline_random(inst: &Instance, seed: u64) -> PolicyOutput {
    let mut ids: Vec<QuestionId> = (0..inst.n()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    ids.truncate(inst.max_len());
    PolicyOutput {
        sequence: ids,
        per_question_pna: None,
        surrogate_value: 0.0,
        diagnostics: Diagnostics::default(),
    }
}

/// The `min(b, n)`-subset of largest `g` (lexicographically first on ties),
/// in seeded random order.
pub fn baseline_max_ent(inst: &Instance, g: &UtilityFunction, seed: u64) -> Result<PolicyOutput> {
    let (n, k) = (inst.n(), inst.max_len());
    if n > BRUTE_FORCE_LIMIT {
        return Err(CascadiaError::ExactLimit {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: (Vec<usize>, f64) = ((0..k).collect(), g.value(&(0..k).collect::<Vec<_>>()));
    let mut evaluations = 1;
    let mut comb: Vec<usize> = (0..k).collect();
    // Lexicographic successor of a k-combination of 0..n.
    while let Some(i) = (0..k).rev().find(|&i| comb[i] < n - k + i) {
        comb[i] += 1;
        for j in i + 1..k {
            comb[j] = comb[j - 1] + 1;
        }
        let v = g.value(&comb);
        evaluations += 1;
        if v > best.1 + TIE_TOL {
            best = (comb.clone(), v);
        }
    }
    let (mut sequence, value) = best;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sequence.shuffle(&mut rng);
    Ok(PolicyOutput {
        sequence,
        per_question_pna: None,
        surrogate_value: value,
        diagnostics: Diagnostics {
            evaluations,
            ..Diagnostics::default()
        },
    })
}

fn falling_factorial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// Cascade-state updates an exhaustive search would perform.
pub fn exact_search_cost(inst: &Instance, g: &UtilityFunction, variant: Variant) -> f64 {
    let (n, l) = (inst.n(), inst.max_len());
    if variant == Variant::Scrolling {
        let per_leaf = if has_closed_form(g) {
            l as f64
        } else {
            2f64.powi(l as i32)
        };
        return falling_factorial(n, l) * per_leaf;
    }
    // With a single continuing branch the state set never splits.
    let splits = variant != Variant::NoPna
        && inst
            .questions
            .iter()
            .any(|q| q.p_answer * q.c_answer > 0.0 && q.p_pna * q.c_pna > 0.0);
    (1..=l)
        .map(|k| falling_factorial(n, k) * if splits { 2f64.powi(k as i32 - 1) } else { 1.0 })
        .sum()
}

struct Search<'a> {
    inst: &'a Instance,
    variant: Variant,
    len: usize,
    used: Vec<bool>,
    prefix: Vec<usize>,
    best_value: f64,
    best: Option<Vec<usize>>,
    prune: bool,
    /// Questions by decreasing `p+ g({q})`, with that value.
    by_value: Vec<(usize, f64)>,
    /// Questions by decreasing continuation upper bound.
    by_cont: Vec<(usize, f64)>,
    nodes: usize,
}

impl Search<'_> {
    /// Upper bound on what the remaining slots can add per unit reading mass.
    fn future_bound(&self) -> f64 {
        let remaining = self.len - self.prefix.len();
        let cmax = self.by_cont.iter().find(|(q, _)| !self.used[*q]).map_or(0.0, |e| e.1);
        let mut total = 0.0;
        let mut reach = 1.0;
        for (_, v) in self.by_value.iter().filter(|(q, _)| !self.used[*q]).take(remaining) {
            total += reach * v;
            reach *= cmax;
        }
        total
    }

    fn dfs(&mut self, c: &Cascade<'_>) {
        self.nodes += 1;
        let k = self.prefix.len();
        if k == self.len {
            let v = c.value();
            let accept = match &self.best {
                None => v >= self.best_value - PRUNE_SLACK,
                Some(_) => v > self.best_value + TIE_TOL,
            };
            if accept {
                self.best_value = v;
                self.best = Some(self.prefix.clone());
            }
            return;
        }
        if self.prune && c.value() + c.reading_mass() * self.future_bound() < self.best_value - PRUNE_SLACK {
            return;
        }
        for q in 0..self.inst.n() {
            if self.used[q] {
                continue;
            }
            let mut next = c.clone();
            next.push(q, slot_params(self.inst, q, k, self.variant));
            self.used[q] = true;
            self.prefix.push(q);
            self.dfs(&next);
            self.prefix.pop();
            self.used[q] = false;
        }
    }
}

/// Best sequence of length exactly `min(b, n)`; ties go to the
/// lexicographically smallest sequence.
///
/// Refuses with [`CascadiaError::ComputeCap`] when the exhaustive cost
/// estimate exceeds `cap`. Submodular utilities are searched with
/// branch-and-bound, which returns the same sequence as full enumeration.
pub fn exact_optimal(inst: &Instance, g: &UtilityFunction, variant: Variant, cap: f64) -> Result<PolicyOutput> {
    let (n, l) = (inst.n(), inst.max_len());
    check_variant(inst, variant, l)?;
    let estimated = exact_search_cost(inst, g, variant);
    if estimated > cap {
        return Err(CascadiaError::ComputeCap { estimated, cap });
    }
    if l == 0 {
        return Ok(PolicyOutput::empty());
    }
    if variant == Variant::Scrolling {
        return exact_scrolling(inst, g);
    }
    let prune = g.guaranteed_submodular();
    let mut incumbent = 0.0;
    if prune {
        let quick =
            alg2_general(inst, g, 0.5, &InnerConfig::default()).and_then(|o| eval_exact(&o.seq(), inst, g, variant));
        if let Ok(r) = quick {
            incumbent = r.value;
        }
    }
    let params_upper = |q: usize| {
        let p = slot_params(
            inst,
            q,
            0,
            if variant == Variant::NoPna {
                Variant::NoPna
            } else {
                Variant::Basic
            },
        );
        (p.answer, p.continuation())
    };
    let mut by_value: Vec<(usize, f64)> = (0..n).map(|q| (q, params_upper(q).0 * g.value(&[q]))).collect();
    by_value.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut by_cont: Vec<(usize, f64)> = (0..n).map(|q| (q, params_upper(q).1)).collect();
    by_cont.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut search = Search {
        inst,
        variant,
        len: l,
        used: vec![false; n],
        prefix: Vec::with_capacity(l),
        best_value: incumbent,
        best: None,
        prune,
        by_value,
        by_cont,
        nodes: 0,
    };
    search.dfs(&Cascade::new(g));
    if search.best.is_none() {
        // Rounding pushed every leaf below the incumbent; search without pruning.
        search.prune = false;
        search.best_value = f64::NEG_INFINITY;
        search.dfs(&Cascade::new(g));
    }
    Ok(PolicyOutput {
        sequence: search.best.expect("a leaf exists"),
        per_question_pna: None,
        surrogate_value: search.best_value,
        diagnostics: Diagnostics {
            evaluations: search.nodes,
            ..Diagnostics::default()
        },
    })
}

fn exact_scrolling(inst: &Instance, g: &UtilityFunction) -> Result<PolicyOutput> {
    fn rec(
        inst: &Instance,
        g: &UtilityFunction,
        len: usize,
        prefix: &mut Vec<usize>,
        best: &mut (Option<Vec<usize>>, f64),
        nodes: &mut usize,
    ) -> Result<()> {
        *nodes += 1;
        if prefix.len() == len {
            let v = eval_exact(&Sequence::from_slots(prefix.clone()), inst, g, Variant::Scrolling)?.value;
            if best.0.is_none() || v > best.1 + TIE_TOL {
                *best = (Some(prefix.clone()), v);
            }
            return Ok(());
        }
        for q in 0..inst.n() {
            if !prefix.contains(&q) {
                prefix.push(q);
                rec(inst, g, len, prefix, best, nodes)?;
                prefix.pop();
            }
        }
        Ok(())
    }
    let mut best = (None, f64::NEG_INFINITY);
    let mut nodes = 0;
    rec(inst, g, inst.max_len(), &mut Vec::new(), &mut best, &mut nodes)?;
    Ok(PolicyOutput {
        sequence: best.0.expect("a leaf exists"),
        per_question_pna: None,
        surrogate_value: best.1,
        diagnostics: Diagnostics {
            evaluations: nodes,
            ..Diagnostics::default()
        },
    })
}

fn without_pna_for(inst: &Instance, spec: &PolicySpec) -> Result<Instance> {
    let kappa = spec.kappa.ok_or(CascadiaError::MissingData {
        variant: "alg5_pna_decision",
        what: "kappa for the without-PNA version",
    })?;
    inst.apply_kappa(kappa)
}

fn run_once(inst: &Instance, g: &UtilityFunction, spec: &PolicySpec, rho: f64) -> Result<PolicyOutput> {
    match spec.kind {
        PolicyKind::Alg1NoPna => alg1_no_pna(inst, g, rho, &spec.inner),
        PolicyKind::Alg2General => alg2_general(inst, g, rho, &spec.inner),
        PolicyKind::Alg3DecayNoPna => alg3_decay_no_pna(inst, g, rho, &spec.inner),
        PolicyKind::Alg4DecayPna => alg4_decay_pna(inst, g, rho, &spec.inner),
        PolicyKind::Alg5PnaDecision => alg5_pna_decision(inst, &without_pna_for(inst, spec)?, g, rho, &spec.inner),
        PolicyKind::Alg6Scrolling => alg6_scrolling(inst, g, &spec.inner),
        PolicyKind::Random => Ok(baseline_random(inst, spec.seed)),
        PolicyKind::MaxEnt => baseline_max_ent(inst, g, spec.seed),
        PolicyKind::ExactOptimal => exact_optimal(inst, g, spec.eval_variant(), spec.compute_cap),
    }
}

/// Runs the policy described by `spec`. With a `rho_sweep`, every listed
/// `rho` is tried and the output with the best exact value is kept
/// (earliest `rho` on ties).
pub fn run_policy(inst: &Instance, g: &UtilityFunction, spec: &PolicySpec) -> Result<PolicyOutput> {
    match (&spec.rho_sweep, spec.kind.uses_rho()) {
        (Some(rhos), true) if !rhos.is_empty() => {
            for &rho in rhos {
                check_rho(rho)?;
            }
            let mut best: Option<(PolicyOutput, f64)> = None;
            for &rho in rhos {
                let out = run_once(inst, g, spec, rho)?;
                let v = evaluate_output(inst, g, spec, &out)?.value;
                if best.as_ref().is_none_or(|(_, bv)| v > *bv + TIE_TOL) {
                    best = Some((out, v));
                }
            }
            Ok(best.expect("nonempty sweep").0)
        }
        _ => run_once(inst, g, spec, spec.rho),
    }
}

/// Exact `f` of a policy's output under the behavior model it targets.
pub fn evaluate_output(
    inst: &Instance,
    g: &UtilityFunction,
    spec: &PolicySpec,
    out: &PolicyOutput,
) -> Result<EvalReport> {
    let seq = out.seq();
    match spec.kind {
        PolicyKind::Alg5PnaDecision => {
            let without = without_pna_for(inst, spec)?;
            let default_flags = vec![true; seq.len()];
            let flags = out.per_question_pna.as_deref().unwrap_or(&default_flags);
            let mixed = apply_pna_choice(inst, &without, seq.slots(), flags);
            eval_exact(&seq, &mixed, g, Variant::Basic)
        }
        PolicyKind::Alg3DecayNoPna if spec.variant.is_none() => {
            eval_exact(&seq, &inst.without_pna(), g, Variant::SlotDecay)
        }
        _ => eval_exact(&seq, inst, g, spec.eval_variant()),
    }
}
