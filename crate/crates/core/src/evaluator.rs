//! Expected utility of a sequence, exactly or by simulation, and the
//! surrogate objectives `u` and `v` used by the policies.
//!
//! Exact evaluation walks the cascade slot by slot, keeping one probability
//! mass per answered subset among customers still reading. Every reading
//! state at slot `i` contributes `mass * P(answer) * gain(answered, Q[i])`,
//! so `f(Q)` accumulates without a terminal pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CascadiaError, Result};
use crate::model::{Instance, QuestionId, Sequence};
use crate::utility::UtilityFunction;

/// Longest sequence [`eval_exact`] accepts.
pub const EXACT_LIMIT: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Basic,
    NoPna,
    SlotDecay,
    Scrolling,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::NoPna => "no_pna",
            Variant::SlotDecay => "slot_decay",
            Variant::Scrolling => "scrolling",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub reachability: Vec<f64>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Expected number of answered questions.
    pub expected_answered: f64,
}

/// Branch probabilities of one question at one slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotParams {
    pub answer: f64,
    pub cont_answer: f64,
    pub skip: f64,
    pub cont_skip: f64,
}

impl SlotParams {
    pub fn continuation(&self) -> f64 {
        self.answer * self.cont_answer + self.skip * self.cont_skip
    }
}

/// Checks that `inst` carries the data `variant` needs for `len` slots.
pub fn check_variant(inst: &Instance, variant: Variant, len: usize) -> Result<()> {
    match variant {
        Variant::SlotDecay => match &inst.slot_decay {
            Some(d) if d.len() >= len => Ok(()),
            _ => Err(CascadiaError::MissingData {
                variant: "slot_decay",
                what: "a slot_decay entry for every slot",
            }),
        },
        Variant::Scrolling => match &inst.position_rates {
            Some(r) if r.len() == inst.n() && r.iter().all(|row| row.len() >= len) => Ok(()),
            _ => Err(CascadiaError::MissingData {
                variant: "scrolling",
                what: "a position_rates row per question covering every slot",
            }),
        },
        Variant::Basic | Variant::NoPna => Ok(()),
    }
}

/// Branch probabilities of question `q` at 0-based `slot`. Call
/// [`check_variant`] first; missing data panics here.
pub fn slot_params(inst: &Instance, q: QuestionId, slot: usize, variant: Variant) -> SlotParams {
    let qq = inst.question(q);
    match variant {
        Variant::Basic => SlotParams {
            answer: qq.p_answer,
            cont_answer: qq.c_answer,
            skip: qq.p_pna,
            cont_skip: qq.c_pna,
        },
        Variant::NoPna => SlotParams {
            answer: qq.p_answer,
            cont_answer: qq.c_answer,
            skip: 0.0,
            cont_skip: 0.0,
        },
        Variant::SlotDecay => SlotParams {
            answer: inst.slot_decay.as_ref().expect("slot decay")[slot] * qq.p_answer,
            cont_answer: qq.c_answer,
            skip: qq.p_pna,
            cont_skip: qq.c_pna,
        },
        // No cascade: every slot is read and answered independently.
        Variant::Scrolling => {
            let p = inst.position_rates.as_ref().expect("position rates")[q][slot];
            SlotParams {
                answer: p,
                cont_answer: 1.0,
                skip: 1.0 - p,
                cont_skip: 1.0,
            }
        }
    }
}

/// Incremental exact evaluation of a growing sequence.
#[derive(Clone, Debug)]
pub struct Cascade<'a> {
    g: &'a UtilityFunction,
    items: Vec<QuestionId>,
    /// Reading states: answered-slot bitmask and probability mass.
    states: Vec<(u32, f64)>,
    value: f64,
    expected_answered: f64,
    reach: Vec<f64>,
}

impl<'a> Cascade<'a> {
    pub fn new(g: &'a UtilityFunction) -> Self {
        Self {
            g,
            items: Vec::new(),
            states: vec![(0, 1.0)],
            value: 0.0,
            expected_answered: 0.0,
            reach: Vec::new(),
        }
    }

    /// Appends `q` with the given branch probabilities.
    pub fn push(&mut self, q: QuestionId, p: SlotParams) {
        let slot = self.items.len();
        assert!(slot < 32, "cascade supports at most 32 slots");
        let reading: f64 = self.states.iter().map(|s| s.1).sum();
        self.reach.push(reading);
        let bit = 1u32 << slot;
        let cont_ans = p.answer * p.cont_answer;
        let cont_skip = p.skip * p.cont_skip;
        let mut next = Vec::with_capacity(self.states.len() * 2);
        let mut set = Vec::with_capacity(slot + 1);
        for &(mask, mass) in &self.states {
            if p.answer > 0.0 {
                set.clear();
                set.extend((0..slot).filter(|j| mask >> j & 1 == 1).map(|j| self.items[j]));
                self.value += mass * p.answer * self.g.gain(&set, q);
            }
            if cont_ans > 0.0 {
                next.push((mask | bit, mass * cont_ans));
            }
            if cont_skip > 0.0 {
                next.push((mask, mass * cont_skip));
            }
        }
        self.expected_answered += reading * p.answer;
        self.items.push(q);
        self.states = next;
    }

    /// `f` of the sequence pushed so far.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Probability that a customer reads past the last pushed slot.
    pub fn reading_mass(&self) -> f64 {
        self.states.iter().map(|s| s.1).sum()
    }

    pub fn items(&self) -> &[QuestionId] {
        &self.items
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    fn into_report(self) -> EvalReport {
        EvalReport {
            value: self.value,
            stderr: None,
            reachability: self.reach,
            method: Method::Exact,
            samples: None,
            expected_answered: self.expected_answered,
        }
    }
}

/// Exact `f(Q)` for the given behavior variant.
pub fn eval_exact(seq: &Sequence, inst: &Instance, g: &UtilityFunction, variant: Variant) -> Result<EvalReport> {
    if seq.len() > EXACT_LIMIT {
        return Err(CascadiaError::ExactLimit {
            size: seq.len(),
            limit: EXACT_LIMIT,
        });
    }
    check_variant(inst, variant, seq.len())?;
    if variant == Variant::Scrolling {
        let probs: Vec<f64> = seq
            .slots()
            .iter()
            .enumerate()
            .map(|(i, &q)| slot_params(inst, q, i, variant).answer)
            .collect();
        return Ok(EvalReport {
            value: g.expected_independent(seq.slots(), &probs)?,
            stderr: None,
            reachability: vec![1.0; seq.len()],
            method: Method::Exact,
            samples: None,
            expected_answered: probs.iter().sum(),
        });
    }
    let mut c = Cascade::new(g);
    for (i, &q) in seq.slots().iter().enumerate() {
        c.push(q, slot_params(inst, q, i, variant));
    }
    Ok(c.into_report())
}

/// Per-slot reading probabilities for the variant.
pub fn variant_reachability(seq: &Sequence, inst: &Instance, variant: Variant) -> Result<Vec<f64>> {
    check_variant(inst, variant, seq.len())?;
    let mut out = Vec::with_capacity(seq.len());
    let mut reach = 1.0;
    for (i, &q) in seq.slots().iter().enumerate() {
        out.push(reach);
        reach *= slot_params(inst, q, i, variant).continuation();
    }
    Ok(out)
}

/// Sample mean of `g(J(Q))` over simulated customers.
pub fn eval_monte_carlo(
    seq: &Sequence,
    inst: &Instance,
    g: &UtilityFunction,
    variant: Variant,
    samples: usize,
    seed: u64,
) -> Result<EvalReport> {
    if samples == 0 {
        return Err(CascadiaError::Config("samples must be at least 1".into()));
    }
    let reachability = variant_reachability(seq, inst, variant)?;
    let params: Vec<SlotParams> = seq
        .slots()
        .iter()
        .enumerate()
        .map(|(i, &q)| slot_params(inst, q, i, variant))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut answered = Vec::with_capacity(seq.len());
    let (mut sum, mut sum_sq, mut answered_total) = (0.0, 0.0, 0usize);
    for _ in 0..samples {
        answered.clear();
        for (&q, p) in seq.slots().iter().zip(&params) {
            let r: f64 = rng.gen();
            let cont = if r < p.answer {
                answered.push(q);
                p.cont_answer
            } else if r < p.answer + p.skip {
                p.cont_skip
            } else {
                break;
            };
            if cont < 1.0 && rng.gen::<f64>() >= cont {
                break;
            }
        }
        let x = g.value(&answered);
        sum += x;
        sum_sq += x * x;
        answered_total += answered.len();
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(EvalReport {
        value: mean,
        stderr: Some((var / n).sqrt()),
        reachability,
        method: Method::MonteCarlo,
        samples: Some(samples),
        expected_answered: answered_total as f64 / n,
    })
}

/// Exact for short sequences, Monte Carlo with `fallback_samples` otherwise.
pub fn eval_auto(
    seq: &Sequence,
    inst: &Instance,
    g: &UtilityFunction,
    variant: Variant,
    fallback_samples: usize,
    seed: u64,
) -> Result<EvalReport> {
    if seq.len() <= EXACT_LIMIT {
        eval_exact(seq, inst, g, variant)
    } else {
        eval_monte_carlo(seq, inst, g, variant, fallback_samples, seed)
    }
}

/// `u(q, S) = a g(S + q) + (1 - a) g(S)` with `a = lambda * p_answer(q)`.
pub fn eval_u(
    g: &UtilityFunction,
    inst: &Instance,
    q: QuestionId,
    set: &[QuestionId],
    lambda: Option<f64>,
) -> Result<f64> {
    if set.contains(&q) {
        return Err(CascadiaError::QuestionInSet(q));
    }
    let a = lambda.unwrap_or(1.0) * inst.question(q).p_answer;
    Ok(g.value(set) + a * g.gain(set, q))
}

/// How `v` is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum VMode {
    #[default]
    Exact,
    Sampled {
        samples: usize,
        seed: u64,
    },
}

/// Fixed uniforms shared by every `v` query of one solver run.
#[derive(Clone, Debug)]
pub struct BernoulliPanel {
    /// `draws[k][q]`: question `q` is included in sample `k` iff the draw is below its probability.
    draws: Vec<Vec<f64>>,
}

impl BernoulliPanel {
    pub fn new(n_questions: usize, samples: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws = (0..samples.max(1))
            .map(|_| (0..n_questions).map(|_| rng.gen()).collect())
            .collect();
        Self { draws }
    }

    pub fn samples(&self) -> usize {
        self.draws.len()
    }

    pub fn expect(&self, g: &UtilityFunction, items: &[QuestionId], probs: &[f64]) -> f64 {
        let mut set = Vec::with_capacity(items.len());
        let mut total = 0.0;
        for row in &self.draws {
            set.clear();
            set.extend(items.iter().zip(probs).filter(|(&q, &p)| row[q] < p).map(|(&q, _)| q));
            total += g.value(&set);
        }
        total / self.draws.len() as f64
    }
}

/// Evaluates `E[g(R)]` under independent inclusion for one solver run.
#[derive(Clone, Debug)]
pub enum Expectation {
    Exact,
    Panel(BernoulliPanel),
}

impl Expectation {
    pub fn new(mode: VMode, n_questions: usize) -> Self {
        match mode {
            VMode::Exact => Expectation::Exact,
            VMode::Sampled { samples, seed } => Expectation::Panel(BernoulliPanel::new(n_questions, samples, seed)),
        }
    }

    /// Falls back to the panel-free closed form whenever one exists.
    pub fn expect(&self, g: &UtilityFunction, items: &[QuestionId], probs: &[f64]) -> Result<f64> {
        match self {
            Expectation::Panel(panel) if !has_closed_form(g) => Ok(panel.expect(g, items, probs)),
            _ => g.expected_independent(items, probs),
        }
    }
}

/// Whether `E[g(R)]` has a closed form (no enumeration or sampling needed).
pub fn has_closed_form(g: &UtilityFunction) -> bool {
    matches!(g, UtilityFunction::Entropy { .. } | UtilityFunction::Modular { .. })
}

/// `E[g(R(S))]` with each question included at its `p_answer`.
pub fn expected_reveal(g: &UtilityFunction, inst: &Instance, set: &[QuestionId], exp: &Expectation) -> Result<f64> {
    let probs: Vec<f64> = set.iter().map(|&q| inst.question(q).p_answer).collect();
    exp.expect(g, set, &probs)
}

/// `v(q, S) = E[g(R(S + q))]`.
pub fn eval_v(g: &UtilityFunction, inst: &Instance, q: QuestionId, set: &[QuestionId], mode: VMode) -> Result<f64> {
    if set.contains(&q) {
        return Err(CascadiaError::QuestionInSet(q));
    }
    let mut items = set.to_vec();
    items.push(q);
    expected_reveal(g, inst, &items, &Expectation::new(mode, inst.n()))
}

/// How several virtual copies of one question combine into one inclusion probability.
#[derive(Clone, Copy, Debug)]
pub enum CopySemantics<'a> {
    /// `lambda_{min slot} * p_answer`.
    MinSlotDecay(&'a [f64]),
    /// Largest `position_rates[q][slot]` among the copies.
    MaxRate(&'a [Vec<f64>]),
}

/// A question placed at a 0-based slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VirtualQuestion {
    pub question: QuestionId,
    pub slot: usize,
}

/// Collapses copies to one `(question, probability)` pair per question, ascending by id.
pub fn collapse_copies(
    inst: &Instance,
    copies: &[VirtualQuestion],
    sem: CopySemantics<'_>,
) -> (Vec<QuestionId>, Vec<f64>) {
    let mut best: Vec<(QuestionId, f64)> = Vec::with_capacity(copies.len());
    for c in copies {
        let p = match sem {
            CopySemantics::MinSlotDecay(decay) => decay[c.slot] * inst.question(c.question).p_answer,
            CopySemantics::MaxRate(rates) => rates[c.question][c.slot],
        };
        match best.iter_mut().find(|(q, _)| *q == c.question) {
            Some(entry) => entry.1 = entry.1.max(p),
            None => best.push((c.question, p)),
        }
    }
    best.sort_by_key(|e| e.0);
    best.into_iter().unzip()
}

/// `v` of a set of virtual copies.
pub fn eval_v_copies(
    g: &UtilityFunction,
    inst: &Instance,
    copies: &[VirtualQuestion],
    sem: CopySemantics<'_>,
    exp: &Expectation,
) -> Result<f64> {
    let (items, probs) = collapse_copies(inst, copies, sem);
    exp.expect(g, &items, &probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Question, UtilityKind};

    fn small_entropy() -> (Instance, UtilityFunction) {
        let qs = vec![
            Question::new(0, 0.6, 0.3, 0.7, 0.4).with_attributes(vec![0]),
            Question::new(1, 0.5, 0.2, 0.5, 0.9).with_attributes(vec![1]),
            Question::new(2, 0.8, 0.1, 0.3, 0.6).with_attributes(vec![0, 2]),
        ];
        let dists = vec![vec![0.5, 0.5], vec![0.2, 0.3, 0.5], vec![0.9, 0.1]];
        let inst = Instance::new(qs, dists, 3, UtilityKind::Entropy);
        let g = UtilityFunction::from_instance(&inst).unwrap();
        (inst, g)
    }

    /// Recursive walk over every branch string.
    fn tree(inst: &Instance, g: &UtilityFunction, seq: &[usize], answered: &mut Vec<usize>) -> f64 {
        let Some((&q, rest)) = seq.split_first() else {
            return g.value(answered);
        };
        let p = inst.question(q);
        let stay = g.value(answered);
        let mut total = (1.0 - p.p_answer - p.p_pna) * stay;
        total += p.p_pna * (1.0 - p.c_pna) * stay;
        total += p.p_pna * p.c_pna * tree(inst, g, rest, answered);
        answered.push(q);
        total += p.p_answer * (1.0 - p.c_answer) * g.value(answered);
        total += p.p_answer * p.c_answer * tree(inst, g, rest, answered);
        answered.pop();
        total
    }

    #[test]
    fn empty_sequence_is_zero() {
        let (inst, g) = small_entropy();
        let r = eval_exact(&Sequence::default(), &inst, &g, Variant::Basic).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.stderr.is_none());
        let mc = eval_monte_carlo(&Sequence::default(), &inst, &g, Variant::Basic, 10, 1).unwrap();
        assert_eq!(mc.value, 0.0);
    }

    #[test]
    fn exact_matches_branch_tree() {
        let (inst, g) = small_entropy();
        for seq in [vec![0, 1, 2], vec![2, 0, 1], vec![1], vec![2, 1]] {
            let want = tree(&inst, &g, &seq, &mut Vec::new());
            let got = eval_exact(&Sequence::from_slots(seq), &inst, &g, Variant::Basic).unwrap();
            assert!((got.value - want).abs() < 1e-12, "{} vs {}", got.value, want);
        }
    }

    #[test]
    fn reachability_and_answered_count() {
        let (inst, g) = small_entropy();
        let r = eval_exact(&Sequence::from_slots(vec![0, 1]), &inst, &g, Variant::Basic).unwrap();
        let c0 = 0.6 * 0.7 + 0.3 * 0.4;
        assert!((r.reachability[1] - c0).abs() < 1e-15);
        assert!((r.expected_answered - (0.6 + c0 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn no_pna_and_unit_decay_reduce() {
        let (inst, g) = small_entropy();
        let seq = Sequence::from_slots(vec![2, 0, 1]);
        let plain = eval_exact(&seq, &inst.without_pna(), &g, Variant::Basic).unwrap();
        let nopna = eval_exact(&seq, &inst, &g, Variant::NoPna).unwrap();
        assert!((plain.value - nopna.value).abs() < 1e-15);
        let unit = inst.clone().with_slot_decay(vec![1.0; 3]);
        let basic = eval_exact(&seq, &inst, &g, Variant::Basic).unwrap();
        let dec = eval_exact(&seq, &unit, &g, Variant::SlotDecay).unwrap();
        assert!((basic.value - dec.value).abs() < 1e-15);
        assert!(matches!(
            eval_exact(&seq, &inst, &g, Variant::SlotDecay),
            Err(CascadiaError::MissingData { .. })
        ));
    }

    #[test]
    fn adversarial_order_matters() {
        // g = |S|, every question answered; only question 0 stops the cascade.
        let n = 10;
        let qs: Vec<Question> = (0..n)
            .map(|i| Question::new(i, 1.0, 0.0, if i == 0 { 0.0 } else { 1.0 }, 0.0))
            .collect();
        let inst = Instance::new(qs, vec![], n, UtilityKind::Modular);
        let g = UtilityFunction::from_instance(&inst).unwrap();
        let first = Sequence::from_slots((0..n).collect());
        let last = Sequence::from_slots((1..n).chain([0]).collect());
        assert_eq!(eval_exact(&first, &inst, &g, Variant::Basic).unwrap().value, 1.0);
        assert_eq!(eval_exact(&last, &inst, &g, Variant::Basic).unwrap().value, n as f64);
        let r = eval_exact(&first, &inst, &g, Variant::Basic).unwrap();
        assert_eq!(&r.reachability[..3], &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn deterministic_monte_carlo_is_exact() {
        let qs: Vec<Question> = (0..3)
            .map(|i| Question::new(i, 1.0, 0.0, 1.0, 0.0).with_attributes(vec![i]))
            .collect();
        let inst = Instance::new(qs, vec![vec![0.5, 0.5]; 3], 3, UtilityKind::Entropy);
        let g = UtilityFunction::from_instance(&inst).unwrap();
        let seq = Sequence::from_slots(vec![0, 1, 2]);
        let mc = eval_monte_carlo(&seq, &inst, &g, Variant::Basic, 100, 3).unwrap();
        assert!((mc.value - g.value(&[0, 1, 2])).abs() < 1e-12);
        assert_eq!(mc.stderr, Some(0.0));
    }

    #[test]
    fn monte_carlo_is_seeded_and_close() {
        let (inst, g) = small_entropy();
        let seq = Sequence::from_slots(vec![0, 2, 1]);
        let a = eval_monte_carlo(&seq, &inst, &g, Variant::Basic, 20_000, 9).unwrap();
        let b = eval_monte_carlo(&seq, &inst, &g, Variant::Basic, 20_000, 9).unwrap();
        assert_eq!(a, b);
        let exact = eval_exact(&seq, &inst, &g, Variant::Basic).unwrap().value;
        assert!((a.value - exact).abs() <= 4.0 * a.stderr.unwrap());
    }

    #[test]
    fn u_examples() {
        let (mut inst, g) = small_entropy();
        let h1 = crate::utility::entropy(&[0.2, 0.3, 0.5]);
        let h0 = 2f64.ln();
        inst.questions[0].p_answer = 0.5;
        let u = eval_u(&g, &inst, 0, &[1], None).unwrap();
        assert!((u - (h1 + 0.5 * h0)).abs() < 1e-12);
        inst.questions[0].p_answer = 1.0;
        assert!((eval_u(&g, &inst, 0, &[1], None).unwrap() - g.value(&[0, 1])).abs() < 1e-15);
        inst.questions[0].p_answer = 0.0;
        assert_eq!(eval_u(&g, &inst, 0, &[1], None).unwrap(), g.value(&[1]));
        assert!(matches!(
            eval_u(&g, &inst, 1, &[1], None),
            Err(CascadiaError::QuestionInSet(1))
        ));
    }

    #[test]
    fn v_examples() {
        let (inst, g) = small_entropy();
        let v0 = eval_v(&g, &inst, 2, &[], VMode::Exact).unwrap();
        assert!((v0 - 0.8 * g.value(&[2])).abs() < 1e-15);
        let v = eval_v(&g, &inst, 2, &[0, 1], VMode::Exact).unwrap();
        let enumerated = g.expected_by_enumeration(&[0, 1, 2], &[0.6, 0.5, 0.8]).unwrap();
        assert!((v - enumerated).abs() < 1e-12);
        let sampled = eval_v(
            &g,
            &inst,
            2,
            &[0, 1],
            VMode::Sampled {
                samples: 40_000,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(sampled, v);
    }

    #[test]
    fn panel_estimate_is_close() {
        let (inst, _) = small_entropy();
        let g = UtilityFunction::custom(|s| (s.len() as f64).sqrt());
        let panel = BernoulliPanel::new(inst.n(), 50_000, 4);
        let est = panel.expect(&g, &[0, 1, 2], &[0.6, 0.5, 0.8]);
        let exact = g.expected_by_enumeration(&[0, 1, 2], &[0.6, 0.5, 0.8]).unwrap();
        assert!((est - exact).abs() < 0.02);
    }

    #[test]
    fn copies_collapse() {
        let (inst, g) = small_entropy();
        let decay = [1.0, 0.5, 0.25];
        let copies = [
            VirtualQuestion { question: 1, slot: 2 },
            VirtualQuestion { question: 1, slot: 1 },
            VirtualQuestion { question: 0, slot: 0 },
        ];
        let (items, probs) = collapse_copies(&inst, &copies, CopySemantics::MinSlotDecay(&decay));
        assert_eq!(items, vec![0, 1]);
        assert_eq!(probs, vec![0.6, 0.25]);
        let v = eval_v_copies(
            &g,
            &inst,
            &copies,
            CopySemantics::MinSlotDecay(&decay),
            &Expectation::Exact,
        )
        .unwrap();
        assert!((v - g.expected_independent(&[0, 1], &[0.6, 0.25]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn scrolling_is_independent_inclusion() {
        let (inst, g) = small_entropy();
        let inst = inst.with_position_rates(vec![vec![0.9, 0.5, 0.1]; 3]);
        let seq = Sequence::from_slots(vec![1, 0, 2]);
        let r = eval_exact(&seq, &inst, &g, Variant::Scrolling).unwrap();
        let want = g.expected_by_enumeration(&[1, 0, 2], &[0.9, 0.5, 0.1]).unwrap();
        assert!((r.value - want).abs() < 1e-12);
        let mc = eval_monte_carlo(&seq, &inst, &g, Variant::Scrolling, 40_000, 2).unwrap();
        assert!((mc.value - want).abs() <= 4.0 * mc.stderr.unwrap());
    }
}
