//! Assortment framing: products shown in a cascade, chosen by MNL.
//!
//! A product is considered with `consider_rate` and skipped otherwise, so the
//! converted question has `p_pna = 1 - consider_rate` and never exits on read.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{CascadiaError, Result};
use crate::evaluator::eval_exact;
use crate::model::{validate_instance, Instance, Question, UtilityKind};
use crate::policies::{run_policy, PolicyKind, PolicyOutput, PolicySpec};
use crate::utility::UtilityFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub id: i64,
    pub consider_rate: f64,
    /// Continuation after considering.
    pub c_consider: f64,
    /// Continuation after skipping.
    pub c_skip: f64,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default = "one")]
    pub revenue: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub display_slots: usize,
    pub products: Vec<Product>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_decay: Option<Vec<f64>>,
}

impl Catalog {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Converted instance plus whether the revenue function is guaranteed submodular.
#[derive(Clone, Debug)]
pub struct CatalogInstance {
    pub instance: Instance,
    pub submodular_safe: bool,
}

pub fn catalog_to_instance(cat: &Catalog) -> Result<CatalogInstance> {
    let questions: Vec<Question> = cat
        .products
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Question::new(i, p.consider_rate, 1.0 - p.consider_rate, p.c_consider, p.c_skip)
                .with_weight(p.weight)
                .with_revenue(p.revenue)
        })
        .collect();
    let mut instance = Instance::new(questions, Vec::new(), cat.display_slots, UtilityKind::Mnl)
        .with_question_labels(cat.products.iter().map(|p| p.id).collect());
    if let Some(decay) = &cat.slot_decay {
        instance = instance.with_slot_decay(decay.clone());
    }
    let violations = validate_instance(&instance);
    if !violations.is_empty() {
        return Err(CascadiaError::Validation(violations));
    }
    let submodular_safe = cat.products.windows(2).all(|w| w[0].revenue == w[1].revenue);
    Ok(CatalogInstance {
        instance,
        submodular_safe,
    })
}

#[derive(Clone, Debug)]
pub struct AssortmentResult {
    pub output: PolicyOutput,
    /// Exact expected revenue of the displayed sequence.
    pub expected_revenue: f64,
    pub submodular_safe: bool,
}

/// Runs a policy with MNL revenue as the utility.
pub fn optimize_assortment(cat: &Catalog, spec: &PolicySpec) -> Result<AssortmentResult> {
    let supported = [
        PolicyKind::Alg2General,
        PolicyKind::Alg4DecayPna,
        PolicyKind::Alg6Scrolling,
        PolicyKind::ExactOptimal,
        PolicyKind::Random,
    ];
    if !supported.contains(&spec.kind) {
        return Err(CascadiaError::Config(format!(
            "policy {} is not available for assortments",
            spec.kind.name()
        )));
    }
    let conv = catalog_to_instance(cat)?;
    if !conv.submodular_safe {
        warn!("unequal revenues: MNL revenue may not be submodular, guarantees do not apply");
    }
    let g = UtilityFunction::from_instance(&conv.instance)?;
    let output = run_policy(&conv.instance, &g, spec)?;
    let expected_revenue = eval_exact(&output.seq(), &conv.instance, &g, spec.eval_variant())?.value;
    Ok(AssortmentResult {
        output,
        expected_revenue,
        submodular_safe: conv.submodular_safe,
    })
}
