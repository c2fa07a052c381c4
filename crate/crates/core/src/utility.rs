//! Set functions `g` over question subsets.
//!
//! Three built-in kinds back the instance JSON `utility` tag: attribute
//! entropy (a weighted coverage function, attributes independent), a modular
//! sum, and the MNL expected revenue. A [`UtilityFunction::custom`] callback
//! covers anything else, e.g. a correlated joint entropy.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CascadiaError, Result};
use crate::model::{Instance, QuestionId, UtilityKind};

/// Largest item count for which expectations are computed by enumerating
/// inclusion patterns.
pub const ENUMERATION_LIMIT: usize = 20;

/// Tolerance for the monotonicity and submodularity inequalities.
pub const SUBMODULAR_TOL: f64 = 1e-9;

type Callback = Arc<dyn Fn(&[QuestionId]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum UtilityFunction {
    /// `H(X_A(S))` with independent attributes: `sum_{a in A(S)} H(a)`.
    Entropy {
        /// Covered attributes of each question as a multi-word bitset.
        cover: Vec<Vec<u64>>,
        attr_entropy: Vec<f64>,
    },
    Modular {
        values: Vec<f64>,
    },
    Mnl {
        weights: Vec<f64>,
        revenues: Vec<f64>,
        equal_revenue: bool,
    },
    Custom(Callback),
}

impl fmt::Debug for UtilityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilityFunction::Entropy { attr_entropy, .. } => f
                .debug_struct("Entropy")
                .field("attributes", &attr_entropy.len())
                .finish(),
            UtilityFunction::Modular { values } => f.debug_struct("Modular").field("values", values).finish(),
            UtilityFunction::Mnl {
                weights,
                revenues,
                equal_revenue,
            } => f
                .debug_struct("Mnl")
                .field("weights", weights)
                .field("revenues", revenues)
                .field("equal_revenue", equal_revenue)
                .finish(),
            UtilityFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Shannon entropy in nats; zero-probability entries contribute nothing.
pub fn entropy(dist: &[f64]) -> f64 {
    dist.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

impl UtilityFunction {
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        match inst.utility_kind {
            UtilityKind::Entropy => {
                let m = inst.attributes.len();
                let words = m.div_ceil(64).max(1);
                let mut cover = Vec::with_capacity(inst.n());
                for q in &inst.questions {
                    let mut bits = vec![0u64; words];
                    for &a in &q.attributes {
                        if a >= m {
                            return Err(CascadiaError::UnknownAttribute(a as i64));
                        }
                        bits[a / 64] |= 1 << (a % 64);
                    }
                    cover.push(bits);
                }
                let attr_entropy = inst.attributes.iter().map(|d| entropy(d)).collect();
                Ok(UtilityFunction::Entropy { cover, attr_entropy })
            }
            UtilityKind::Modular => Ok(UtilityFunction::Modular {
                values: inst.questions.iter().map(|q| q.weight).collect(),
            }),
            UtilityKind::Mnl => {
                let weights: Vec<f64> = inst.questions.iter().map(|q| q.weight).collect();
                if let Some(i) = weights.iter().position(|&w| w.is_nan() || w < 0.0) {
                    return Err(CascadiaError::Config(format!("question {i} has negative MNL weight")));
                }
                let revenues: Vec<f64> = inst.questions.iter().map(|q| q.revenue).collect();
                let equal_revenue = revenues.windows(2).all(|w| w[0] == w[1]);
                Ok(UtilityFunction::Mnl {
                    weights,
                    revenues,
                    equal_revenue,
                })
            }
        }
    }

    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[QuestionId]) -> f64 + Send + Sync + 'static,
    {
        UtilityFunction::Custom(Arc::new(f))
    }

    /// Whether the function is monotone submodular by construction.
    /// MNL revenue qualifies only when all revenues are equal; callbacks are unknown.
    pub fn guaranteed_submodular(&self) -> bool {
        match self {
            UtilityFunction::Entropy { .. } | UtilityFunction::Modular { .. } => true,
            UtilityFunction::Mnl { equal_revenue, .. } => *equal_revenue,
            UtilityFunction::Custom(_) => false,
        }
    }

    /// `g(items)`. `items` must not contain duplicates for the modular and MNL kinds.
    pub fn value(&self, items: &[QuestionId]) -> f64 {
        match self {
            UtilityFunction::Entropy { cover, attr_entropy } => {
                if items.is_empty() {
                    return 0.0;
                }
                let words = cover[0].len();
                let mut total = 0.0;
                for w in 0..words {
                    let mut bits = 0u64;
                    for &q in items {
                        bits |= cover[q][w];
                    }
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        total += attr_entropy[w * 64 + b];
                        bits &= bits - 1;
                    }
                }
                total
            }
            UtilityFunction::Modular { values } => items.iter().map(|&q| values[q]).sum(),
            UtilityFunction::Mnl { weights, revenues, .. } => {
                let w_total: f64 = items.iter().map(|&q| weights[q]).sum();
                let num: f64 = items.iter().map(|&q| weights[q] * revenues[q]).sum();
                num / (1.0 + w_total)
            }
            UtilityFunction::Custom(f) => f(items),
        }
    }

    /// `g(items + x) - g(items)`.
    pub fn gain(&self, items: &[QuestionId], x: QuestionId) -> f64 {
        match self {
            UtilityFunction::Modular { values } => values[x],
            UtilityFunction::Entropy { cover, attr_entropy } => {
                let mut total = 0.0;
                for (w, &xw) in cover[x].iter().enumerate() {
                    let mut covered = 0u64;
                    for &q in items {
                        covered |= cover[q][w];
                    }
                    let mut bits = xw & !covered;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        total += attr_entropy[w * 64 + b];
                        bits &= bits - 1;
                    }
                }
                total
            }
            _ => {
                let mut with = items.to_vec();
                with.push(x);
                self.value(&with) - self.value(items)
            }
        }
    }

    /// `E[g(R)]` where `items[j]` is included independently with `probs[j]`.
    ///
    /// Entropy and modular kinds use a closed form; everything else enumerates
    /// the `2^k` inclusion patterns and errors past [`ENUMERATION_LIMIT`].
    pub fn expected_independent(&self, items: &[QuestionId], probs: &[f64]) -> Result<f64> {
        debug_assert_eq!(items.len(), probs.len());
        match self {
            UtilityFunction::Modular { values } => Ok(items.iter().zip(probs).map(|(&q, &p)| p * values[q]).sum()),
            UtilityFunction::Entropy { cover, attr_entropy } => {
                // Attribute a is observed unless every covering item is left out.
                let mut total = 0.0;
                for (a, &h) in attr_entropy.iter().enumerate() {
                    if h == 0.0 {
                        continue;
                    }
                    let (w, bit) = (a / 64, 1u64 << (a % 64));
                    let mut miss = 1.0;
                    let mut touched = false;
                    for (&q, &p) in items.iter().zip(probs) {
                        if cover[q][w] & bit != 0 {
                            miss *= 1.0 - p;
                            touched = true;
                        }
                    }
                    if touched {
                        total += h * (1.0 - miss);
                    }
                }
                Ok(total)
            }
            _ => self.expected_by_enumeration(items, probs),
        }
    }

    /// Enumerates all `2^k` inclusion patterns.
    pub fn expected_by_enumeration(&self, items: &[QuestionId], probs: &[f64]) -> Result<f64> {
        let k = items.len();
        if k > ENUMERATION_LIMIT {
            return Err(CascadiaError::ExactLimit {
                size: k,
                limit: ENUMERATION_LIMIT,
            });
        }
        let mut total = 0.0;
        let mut chosen = Vec::with_capacity(k);
        for mask in 0u32..(1u32 << k) {
            let mut pr = 1.0;
            chosen.clear();
            for j in 0..k {
                if mask >> j & 1 == 1 {
                    pr *= probs[j];
                    chosen.push(items[j]);
                } else {
                    pr *= 1.0 - probs[j];
                }
            }
            if pr != 0.0 {
                total += pr * self.value(&chosen);
            }
        }
        Ok(total)
    }
}

/// `H(X_A(S))` for the instance's attributes (natural log).
pub fn eval_entropy(set: &[QuestionId], inst: &Instance) -> Result<f64> {
    let mut covered = vec![false; inst.attributes.len()];
    for &q in set {
        for &a in &inst.question(q).attributes {
            *covered.get_mut(a).ok_or(CascadiaError::UnknownAttribute(a as i64))? = true;
        }
    }
    Ok(covered
        .iter()
        .zip(&inst.attributes)
        .filter(|(c, _)| **c)
        .map(|(_, d)| entropy(d))
        .sum())
}

/// Sum of per-question values (the `weight` field, default 1).
pub fn eval_modular(set: &[QuestionId], inst: &Instance) -> f64 {
    set.iter().map(|&q| inst.question(q).weight).sum()
}

/// MNL expected revenue `sum_q gamma_q w_q / (1 + W(S))`.
pub fn eval_mnl_revenue(set: &[QuestionId], inst: &Instance) -> Result<f64> {
    let mut w_total = 0.0;
    let mut num = 0.0;
    for &q in set {
        let q = inst.question(q);
        if q.weight.is_nan() || q.weight < 0.0 {
            return Err(CascadiaError::Config(format!(
                "question {} has negative MNL weight",
                q.id
            )));
        }
        w_total += q.weight;
        num += q.weight * q.revenue;
    }
    Ok(num / (1.0 + w_total))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Monotonicity,
    Submodularity,
}

/// A violated inequality. For monotonicity, `small` = `large` and the check
/// was `g(small + element) >= g(small)`; for submodularity it was
/// `gain(small, element) >= gain(large, element)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub small: Vec<QuestionId>,
    pub large: Vec<QuestionId>,
    pub element: QuestionId,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmodularityReport {
    pub monotone: bool,
    pub submodular: bool,
    pub exhaustive: bool,
    pub checked: usize,
    pub witnesses: Vec<Witness>,
}

const MAX_WITNESSES: usize = 16;
const RANDOM_TRIPLES: usize = 20_000;

/// Checks both inequalities of a monotone submodular set function over `ground`.
///
/// Up to `exhaustive_limit` elements every `(Y1 ⊆ Y2, y ∉ Y2)` triple is
/// checked; beyond that `RANDOM_TRIPLES` triples are sampled with `seed`.
pub fn check_monotone_submodular<F>(
    f: F,
    ground: &[QuestionId],
    exhaustive_limit: usize,
    seed: u64,
) -> SubmodularityReport
where
    F: Fn(&[QuestionId]) -> f64,
{
    let n = ground.len();
    let to_items =
        |mask: u64| -> Vec<QuestionId> { (0..n).filter(|&j| mask >> j & 1 == 1).map(|j| ground[j]).collect() };
    let mut report = SubmodularityReport {
        monotone: true,
        submodular: true,
        exhaustive: n <= exhaustive_limit && n <= ENUMERATION_LIMIT,
        checked: 0,
        witnesses: Vec::new(),
    };
    let record = |report: &mut SubmodularityReport, w: Witness| {
        match w.kind {
            WitnessKind::Monotonicity => report.monotone = false,
            WitnessKind::Submodularity => report.submodular = false,
        }
        if report.witnesses.len() < MAX_WITNESSES {
            report.witnesses.push(w);
        }
    };

    if report.exhaustive {
        let values: Vec<f64> = (0..1u64 << n).map(|m| f(&to_items(m))).collect();
        for y2 in 0..1u64 << n {
            for (j, &element) in ground.iter().enumerate() {
                let bit = 1u64 << j;
                if y2 & bit != 0 {
                    continue;
                }
                let big_gain = values[(y2 | bit) as usize] - values[y2 as usize];
                report.checked += 1;
                if big_gain < -SUBMODULAR_TOL {
                    record(
                        &mut report,
                        Witness {
                            kind: WitnessKind::Monotonicity,
                            small: to_items(y2),
                            large: to_items(y2),
                            element,
                            lhs: values[(y2 | bit) as usize],
                            rhs: values[y2 as usize],
                        },
                    );
                }
                // all submasks y1 of y2
                let mut y1 = y2;
                loop {
                    let small_gain = values[(y1 | bit) as usize] - values[y1 as usize];
                    report.checked += 1;
                    if small_gain < big_gain - SUBMODULAR_TOL {
                        record(
                            &mut report,
                            Witness {
                                kind: WitnessKind::Submodularity,
                                small: to_items(y1),
                                large: to_items(y2),
                                element,
                                lhs: small_gain,
                                rhs: big_gain,
                            },
                        );
                    }
                    if y1 == 0 {
                        break;
                    }
                    y1 = (y1 - 1) & y2;
                }
            }
        }
        return report;
    }

    if n == 0 {
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..RANDOM_TRIPLES {
        order.shuffle(&mut rng);
        let y = order[0];
        let large_len = rng.gen_range(0..n);
        let small_len = rng.gen_range(0..=large_len);
        let mut large: Vec<QuestionId> = order[1..=large_len].iter().map(|&j| ground[j]).collect();
        let mut small: Vec<QuestionId> = large[..small_len].to_vec();
        large.sort_unstable();
        small.sort_unstable();
        let elem = ground[y];
        let gain = |set: &[QuestionId]| {
            let mut with = set.to_vec();
            with.push(elem);
            (f(&with), f(set))
        };
        let (lw, l) = gain(&large);
        let (sw, s) = gain(&small);
        report.checked += 1;
        if lw - l < -SUBMODULAR_TOL {
            record(
                &mut report,
                Witness {
                    kind: WitnessKind::Monotonicity,
                    small: large.clone(),
                    large: large.clone(),
                    element: elem,
                    lhs: lw,
                    rhs: l,
                },
            );
        }
        if sw - s < (lw - l) - SUBMODULAR_TOL {
            record(
                &mut report,
                Witness {
                    kind: WitnessKind::Submodularity,
                    small,
                    large,
                    element: elem,
                    lhs: sw - s,
                    rhs: lw - l,
                },
            );
        }
    }
    report
}

/// [`check_monotone_submodular`] for `g` over all questions of `inst`.
pub fn check_utility(g: &UtilityFunction, inst: &Instance, exhaustive_limit: usize, seed: u64) -> SubmodularityReport {
    let ground: Vec<QuestionId> = (0..inst.n()).collect();
    check_monotone_submodular(|s| g.value(s), &ground, exhaustive_limit, seed)
}
