//! Core domain types: questions with their cascade behaviour parameters,
//! instances, sequences and reachability arithmetic.
//!
//! Question and attribute ids are dense (`0..n`) inside an [`Instance`].
//! External ids from the JSON schema are remapped at ingestion and kept as
//! labels so they can be written back out.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CascadiaError, Result};

pub type QuestionId = usize;

pub const INSTANCE_VERSION: &str = "cascadia-instance/1";

/// Absolute tolerance used for probability-sum checks.
const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Question {
    pub id: QuestionId,
    /// Probability of answering once read.
    pub p_answer: f64,
    /// Probability of picking "prefer not to answer" once read.
    pub p_pna: f64,
    /// Continuation probability after answering.
    pub c_answer: f64,
    /// Continuation probability after PNA.
    pub c_pna: f64,
    /// Dense attribute indices covered by this question.
    pub attributes: Vec<usize>,
    /// MNL weight; also the per-question value for the modular utility.
    pub weight: f64,
    /// MNL revenue.
    pub revenue: f64,
}

impl Question {
    pub fn new(id: QuestionId, p_answer: f64, p_pna: f64, c_answer: f64, c_pna: f64) -> Self {
        Self {
            id,
            p_answer,
            p_pna,
            c_answer,
            c_pna,
            attributes: Vec::new(),
            weight: 1.0,
            revenue: 1.0,
        }
    }

    pub fn with_attributes(mut self, attributes: Vec<usize>) -> Self {
        self.attributes = attributes;
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_revenue(mut self, revenue: f64) -> Self {
        self.revenue = revenue;
        self
    }

    /// Aggregated continuation `p+ c+ + p- c-`.
    pub fn agg_continuation(&self) -> f64 {
        self.p_answer * self.c_answer + self.p_pna * self.c_pna
    }

    /// Aggregated continuation with the answer branch scaled by a slot decay factor.
    pub fn agg_continuation_decayed(&self, lambda: f64) -> f64 {
        lambda * self.p_answer * self.c_answer + self.p_pna * self.c_pna
    }
}

/// Aggregated continuation of `q`, optionally at 0-based `slot` under `decay`.
pub fn agg_continuation(q: &Question, slot: Option<usize>, decay: Option<&[f64]>) -> f64 {
    match (slot, decay) {
        (Some(i), Some(d)) => q.agg_continuation_decayed(d[i]),
        _ => q.agg_continuation(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityKind {
    Entropy,
    Modular,
    Mnl,
}

impl fmt::Display for UtilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UtilityKind::Entropy => "entropy",
            UtilityKind::Modular => "modular",
            UtilityKind::Mnl => "mnl",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub questions: Vec<Question>,
    /// Attribute value distributions, indexed by dense attribute id.
    pub attributes: Vec<Vec<f64>>,
    pub budget: usize,
    /// Slot decay factors `lambda_1..lambda_b` (0-based in memory).
    pub slot_decay: Option<Vec<f64>>,
    pub utility_kind: UtilityKind,
    /// `position_rates[q][i]`: answer probability of question `q` at slot `i`.
    pub position_rates: Option<Vec<Vec<f64>>>,
    question_labels: Vec<i64>,
    attribute_labels: Vec<i64>,
}

impl Instance {
    pub fn new(questions: Vec<Question>, attributes: Vec<Vec<f64>>, budget: usize, utility_kind: UtilityKind) -> Self {
        let question_labels = (0..questions.len() as i64).collect();
        let attribute_labels = (0..attributes.len() as i64).collect();
        Self {
            questions,
            attributes,
            budget,
            slot_decay: None,
            utility_kind,
            position_rates: None,
            question_labels,
            attribute_labels,
        }
    }

    pub fn with_slot_decay(mut self, decay: Vec<f64>) -> Self {
        self.slot_decay = Some(decay);
        self
    }

    pub fn with_position_rates(mut self, rates: Vec<Vec<f64>>) -> Self {
        self.position_rates = Some(rates);
        self
    }

    /// External question ids, one per question.
    pub fn with_question_labels(mut self, labels: Vec<i64>) -> Self {
        assert_eq!(labels.len(), self.questions.len());
        self.question_labels = labels;
        self
    }

    pub fn n(&self) -> usize {
        self.questions.len()
    }

    /// Effective sequence length cap, `min(budget, n)`.
    pub fn max_len(&self) -> usize {
        self.budget.min(self.n())
    }

    pub fn question(&self, id: QuestionId) -> &Question {
        &self.questions[id]
    }

    /// External id of a dense question id.
    pub fn question_label(&self, id: QuestionId) -> i64 {
        self.question_labels[id]
    }

    pub fn question_by_label(&self, label: i64) -> Option<QuestionId> {
        self.question_labels.iter().position(|&l| l == label)
    }

    /// Copy of the instance with every `p_pna` set to zero.
    pub fn without_pna(&self) -> Instance {
        let mut out = self.clone();
        for q in &mut out.questions {
            q.p_pna = 0.0;
        }
        out
    }

    /// The instance as it would behave with PNA removed.
    ///
    /// `kappa > 0` moves the answer rate toward 1 by `kappa (1 - p)`,
    /// `kappa <= 0` scales it by `1 + kappa`; `p_pna` and `c_pna` become 0.
    pub fn apply_kappa(&self, kappa: f64) -> Result<Instance> {
        if !(-1.0..=1.0).contains(&kappa) {
            return Err(CascadiaError::InvalidKappa(kappa));
        }
        let mut out = self.clone();
        for q in &mut out.questions {
            q.p_answer = kappa_rate(q.p_answer, kappa);
            q.p_pna = 0.0;
            q.c_pna = 0.0;
        }
        Ok(out)
    }

    pub fn from_json_str(s: &str) -> Result<Instance> {
        let doc: InstanceDoc = serde_json::from_str(s)?;
        doc.into_instance()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceDoc::from(self))?)
    }
}

/// An ordered arrangement of distinct question ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Sequence(Vec<QuestionId>);

impl Sequence {
    /// Checks distinctness, range and length against the instance.
    pub fn new(slots: Vec<QuestionId>, inst: &Instance) -> Result<Self> {
        if slots.len() > inst.budget {
            return Err(CascadiaError::InvalidSequence(format!(
                "length {} exceeds budget {}",
                slots.len(),
                inst.budget
            )));
        }
        let mut seen = vec![false; inst.n()];
        for &q in &slots {
            if q >= inst.n() {
                return Err(CascadiaError::InvalidSequence(format!("question {q} out of range")));
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(CascadiaError::InvalidSequence(format!("question {q} repeated")));
            }
        }
        Ok(Sequence(slots))
    }

    pub fn from_slots(slots: Vec<QuestionId>) -> Self {
        Sequence(slots)
    }

    pub fn slots(&self) -> &[QuestionId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<QuestionId> {
        self.0
    }
}

impl From<Vec<QuestionId>> for Sequence {
    fn from(v: Vec<QuestionId>) -> Self {
        Sequence(v)
    }
}

/// Probability that each slot is read, without slot decay.
pub fn reachability(seq: &Sequence, inst: &Instance) -> Vec<f64> {
    reachability_inner(seq, inst, None)
}

/// Probability that each slot is read when the answer branch at slot `i`
/// is scaled by `decay[i]`.
pub fn reachability_with_decay(seq: &Sequence, inst: &Instance, decay: &[f64]) -> Vec<f64> {
    reachability_inner(seq, inst, Some(decay))
}

fn reachability_inner(seq: &Sequence, inst: &Instance, decay: Option<&[f64]>) -> Vec<f64> {
    let mut out = Vec::with_capacity(seq.len());
    let mut reach = 1.0;
    for (i, &q) in seq.slots().iter().enumerate() {
        out.push(reach);
        reach *= agg_continuation(inst.question(q), Some(i), decay);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Instance,
    Question(i64),
    Attribute(i64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: Subject,
    pub message: String,
}

impl Violation {
    fn new(subject: Subject, message: impl Into<String>) -> Self {
        Self {
            subject,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            Subject::Instance => write!(f, "instance: {}", self.message),
            Subject::Question(id) => write!(f, "question {id}: {}", self.message),
            Subject::Attribute(id) => write!(f, "attribute {id}: {}", self.message),
        }
    }
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Every violated invariant of `inst`. Empty means valid.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.budget < 1 {
        out.push(Violation::new(Subject::Instance, "budget must be at least 1"));
    }
    for (idx, q) in inst.questions.iter().enumerate() {
        let subj = || Subject::Question(inst.question_labels[idx]);
        if q.id != idx {
            out.push(Violation::new(subj(), "id is not its dense index"));
        }
        for (name, v) in [
            ("p_answer", q.p_answer),
            ("p_pna", q.p_pna),
            ("c_answer", q.c_answer),
            ("c_pna", q.c_pna),
        ] {
            if !in_unit(v) {
                out.push(Violation::new(subj(), format!("{name} outside [0,1]")));
            }
        }
        if q.p_answer + q.p_pna > 1.0 + PROB_TOL {
            out.push(Violation::new(subj(), "p_answer+p_pna>1"));
        }
        if q.weight.is_nan() || q.weight < 0.0 {
            out.push(Violation::new(subj(), "negative weight"));
        }
        if q.revenue.is_nan() || q.revenue < 0.0 {
            out.push(Violation::new(subj(), "negative revenue"));
        }
        for &a in &q.attributes {
            if a >= inst.attributes.len() {
                out.push(Violation::new(subj(), format!("unknown attribute index {a}")));
            }
        }
    }
    for (idx, dist) in inst.attributes.iter().enumerate() {
        let subj = || Subject::Attribute(inst.attribute_labels[idx]);
        if dist.iter().any(|&p| p.is_nan() || p < 0.0) {
            out.push(Violation::new(subj(), "negative probability"));
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            out.push(Violation::new(subj(), format!("distribution sums to {sum}, not 1")));
        }
    }
    if let Some(decay) = &inst.slot_decay {
        if decay.first().is_none_or(|&l| l != 1.0) {
            out.push(Violation::new(Subject::Instance, "decay must start with 1"));
        }
        if decay.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
            out.push(Violation::new(Subject::Instance, "decay outside (0,1]"));
        }
        if decay.windows(2).any(|w| w[1] > w[0]) {
            out.push(Violation::new(Subject::Instance, "decay not nonincreasing"));
        }
        if decay.len() < inst.budget {
            out.push(Violation::new(Subject::Instance, "decay shorter than budget"));
        }
    }
    if let Some(rates) = &inst.position_rates {
        if rates.len() != inst.n() {
            out.push(Violation::new(
                Subject::Instance,
                "position_rates must have one row per question",
            ));
        }
        for (idx, row) in rates.iter().enumerate() {
            let label = inst.question_labels.get(idx).copied().unwrap_or(idx as i64);
            if row.len() != inst.budget {
                out.push(Violation::new(
                    Subject::Question(label),
                    "position_rates row length differs from budget",
                ));
            }
            if row.iter().any(|&p| !in_unit(p)) {
                out.push(Violation::new(Subject::Question(label), "position rate outside [0,1]"));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// JSON schema

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionDoc {
    pub id: i64,
    pub p_answer: f64,
    pub p_pna: f64,
    pub c_answer: f64,
    pub c_pna: f64,
    #[serde(default)]
    pub attributes: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revenue: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeDoc {
    pub id: i64,
    pub distribution: Vec<f64>,
}

/// The on-disk instance format, `cascadia-instance/1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub version: String,
    pub budget: usize,
    pub utility: UtilityKind,
    pub questions: Vec<QuestionDoc>,
    #[serde(default)]
    pub attributes: Vec<AttributeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_decay: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_rates: Option<Vec<Vec<f64>>>,
}

impl InstanceDoc {
    /// Maps external ids to dense ids. Returns the instance together with
    /// every violation found, including those only visible before remapping.
    pub fn to_instance_unchecked(&self) -> (Instance, Vec<Violation>) {
        let mut violations = Vec::new();
        if self.version != INSTANCE_VERSION {
            violations.push(Violation::new(
                Subject::Instance,
                format!("unsupported version {:?}", self.version),
            ));
        }
        let mut attr_index = HashMap::new();
        let mut attributes = Vec::new();
        let mut attribute_labels = Vec::new();
        for a in &self.attributes {
            if attr_index.insert(a.id, attributes.len()).is_some() {
                violations.push(Violation::new(Subject::Attribute(a.id), "duplicate attribute id"));
                continue;
            }
            attributes.push(a.distribution.clone());
            attribute_labels.push(a.id);
        }
        let mut seen = HashMap::new();
        let mut questions = Vec::new();
        let mut question_labels = Vec::new();
        for q in &self.questions {
            if seen.insert(q.id, ()).is_some() {
                violations.push(Violation::new(Subject::Question(q.id), "duplicate question id"));
                continue;
            }
            let mut attrs = Vec::with_capacity(q.attributes.len());
            for a in &q.attributes {
                match attr_index.get(a) {
                    Some(&i) => attrs.push(i),
                    None => violations.push(Violation::new(
                        Subject::Question(q.id),
                        format!("unknown attribute id {a}"),
                    )),
                }
            }
            let dense = questions.len();
            questions.push(Question {
                id: dense,
                p_answer: q.p_answer,
                p_pna: q.p_pna,
                c_answer: q.c_answer,
                c_pna: q.c_pna,
                attributes: attrs,
                weight: q.weight.unwrap_or(1.0),
                revenue: q.revenue.unwrap_or(1.0),
            });
            question_labels.push(q.id);
        }
        let inst = Instance {
            questions,
            attributes,
            budget: self.budget,
            slot_decay: self.slot_decay.clone(),
            utility_kind: self.utility,
            position_rates: self.position_rates.clone(),
            question_labels,
            attribute_labels,
        };
        violations.extend(validate_instance(&inst));
        (inst, violations)
    }

    pub fn into_instance(self) -> Result<Instance> {
        let (inst, violations) = self.to_instance_unchecked();
        if violations.is_empty() {
            Ok(inst)
        } else {
            Err(CascadiaError::Validation(violations))
        }
    }
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        let questions = inst
            .questions
            .iter()
            .map(|q| QuestionDoc {
                id: inst.question_labels[q.id],
                p_answer: q.p_answer,
                p_pna: q.p_pna,
                c_answer: q.c_answer,
                c_pna: q.c_pna,
                attributes: q.attributes.iter().map(|&a| inst.attribute_labels[a]).collect(),
                weight: Some(q.weight),
                revenue: Some(q.revenue),
            })
            .collect();
        let attributes = inst
            .attributes
            .iter()
            .enumerate()
            .map(|(i, d)| AttributeDoc {
                id: inst.attribute_labels[i],
                distribution: d.clone(),
            })
            .collect();
        InstanceDoc {
            version: INSTANCE_VERSION.to_string(),
            budget: inst.budget,
            utility: inst.utility_kind,
            questions,
            attributes,
            slot_decay: inst.slot_decay.clone(),
            position_rates: inst.position_rates.clone(),
        }
    }
}

/// Answer rate once PNA is withdrawn.
pub fn kappa_rate(p_answer: f64, kappa: f64) -> f64 {
    if kappa > 0.0 {
        (1.0 - p_answer) * kappa + p_answer
    } else {
        (1.0 + kappa) * p_answer
    }
}
