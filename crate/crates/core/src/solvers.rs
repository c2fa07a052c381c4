//! Constrained maximizers for monotone set functions.
//!
//! Items are plain indices; the caller's objective interprets them (real
//! questions, or virtual question copies). Every solver is deterministic and
//! breaks ties toward the lowest item id.

use serde::{Deserialize, Serialize};

use crate::error::{CascadiaError, Result};

/// Largest ground set [`brute_force_subset`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Slack on the knapsack comparison so that exact-budget sums survive rounding.
const KNAPSACK_SLACK: f64 = 1e-12;
/// Minimum improvement for a local-search swap.
const SWAP_IMPROVEMENT: f64 = 1e-9;
/// Brute-force replacement threshold; keeps the lexicographically first of near-ties.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    /// Knapsack capacity, `-ln rho`.
    pub log_budget: f64,
    /// Knapsack weight per item id; `+inf` makes the item ineligible.
    pub item_weights: Vec<f64>,
    /// Maximum number of selected items.
    pub cardinality: usize,
    /// Class per item id; at most one item per class.
    pub partition_classes: Option<Vec<usize>>,
    pub excluded: Option<usize>,
}

impl ConstraintSet {
    /// Knapsack `-ln(c_i) <= -ln rho` with the given continuations.
    pub fn from_continuations(continuations: &[f64], rho: f64, cardinality: usize) -> Self {
        Self {
            log_budget: -rho.ln(),
            item_weights: continuations.iter().map(|&c| log_weight(c)).collect(),
            cardinality,
            partition_classes: None,
            excluded: None,
        }
    }

    /// No knapsack; only cardinality (and any partition).
    pub fn cardinality_only(n_items: usize, cardinality: usize) -> Self {
        Self {
            log_budget: f64::INFINITY,
            item_weights: vec![0.0; n_items],
            cardinality,
            partition_classes: None,
            excluded: None,
        }
    }

    pub fn with_partition(mut self, classes: Vec<usize>) -> Self {
        self.partition_classes = Some(classes);
        self
    }

    pub fn with_excluded(mut self, item: usize) -> Self {
        self.excluded = Some(item);
        self
    }

    fn eligible(&self, item: usize) -> bool {
        self.excluded != Some(item) && self.item_weights[item] <= self.log_budget + KNAPSACK_SLACK
    }
}

/// `-ln c`, infinite at zero.
pub fn log_weight(c: f64) -> f64 {
    if c <= 0.0 {
        f64::INFINITY
    } else {
        (-c.ln()).max(0.0)
    }
}

/// Checks every constraint, including distinctness.
pub fn is_feasible(items: &[usize], cons: &ConstraintSet) -> bool {
    if items.len() > cons.cardinality {
        return false;
    }
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    if items
        .iter()
        .any(|&i| Some(i) == cons.excluded || i >= cons.item_weights.len())
    {
        return false;
    }
    let weight: f64 = items.iter().map(|&i| cons.item_weights[i]).sum();
    if weight > cons.log_budget + KNAPSACK_SLACK {
        return false;
    }
    if let Some(classes) = &cons.partition_classes {
        let mut cls: Vec<usize> = items.iter().map(|&i| classes[i]).collect();
        cls.sort_unstable();
        if cls.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    /// Selected items, ascending.
    pub items: Vec<usize>,
    /// The same items in the order the solver selected them.
    pub order: Vec<usize>,
    pub objective: f64,
    /// Objective oracle calls.
    pub evaluations: usize,
    pub method: String,
}

/// Selection state shared by the greedy variants.
struct Partial<'c> {
    cons: &'c ConstraintSet,
    items: Vec<usize>,
    weight: f64,
    used_classes: Vec<usize>,
}

impl<'c> Partial<'c> {
    fn new(cons: &'c ConstraintSet) -> Self {
        Self {
            cons,
            items: Vec::new(),
            weight: 0.0,
            used_classes: Vec::new(),
        }
    }

    fn can_add(&self, x: usize) -> bool {
        if self.items.len() >= self.cons.cardinality || self.items.contains(&x) {
            return false;
        }
        if !self.cons.eligible(x) || self.weight + self.cons.item_weights[x] > self.cons.log_budget + KNAPSACK_SLACK {
            return false;
        }
        match &self.cons.partition_classes {
            Some(classes) => !self.used_classes.contains(&classes[x]),
            None => true,
        }
    }

    fn add(&mut self, x: usize) {
        self.items.push(x);
        self.weight += self.cons.item_weights[x];
        if let Some(classes) = &self.cons.partition_classes {
            self.used_classes.push(classes[x]);
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Rule {
    Gain,
    Density,
}

/// Extends `start` greedily; returns the items in pick order, their value
/// and the oracle calls.
fn greedy_from<F>(
    f: &F,
    ground: &[usize],
    cons: &ConstraintSet,
    start: &[usize],
    rule: Rule,
) -> (Vec<usize>, f64, usize)
where
    F: Fn(&[usize]) -> f64,
{
    let mut part = Partial::new(cons);
    for &x in start {
        part.add(x);
    }
    let mut current = f(&part.items);
    let mut evals = 1;
    let mut trial = part.items.clone();
    loop {
        // (free item?, score, gain, item)
        let mut best: Option<(bool, f64, f64, usize)> = None;
        for &x in ground {
            if !part.can_add(x) {
                continue;
            }
            trial.clear();
            trial.extend_from_slice(&part.items);
            trial.push(x);
            let gain = f(&trial) - current;
            evals += 1;
            if gain <= 0.0 {
                continue;
            }
            let w = cons.item_weights[x];
            let key = match rule {
                Rule::Gain => (false, gain),
                Rule::Density if w <= 0.0 => (true, gain),
                Rule::Density => (false, gain / w),
            };
            let better = match best {
                None => true,
                Some((free, score, _, _)) => (key.0, key.1) > (free, score),
            };
            if better {
                best = Some((key.0, key.1, gain, x));
            }
        }
        match best {
            Some((_, _, gain, x)) => {
                part.add(x);
                current += gain;
            }
            None => break,
        }
    }
    // Re-evaluate the final set so the reported value carries no drift.
    let value = f(&part.items);
    (part.items, value, evals + 1)
}

/// Feasible subsets of `pool` with at most `depth` items, in lexicographic order.
fn seeds(pool: &[usize], cons: &ConstraintSet, depth: usize) -> Vec<Vec<usize>> {
    fn rec(
        pool: &[usize],
        from: usize,
        cur: &mut Vec<usize>,
        depth: usize,
        cons: &ConstraintSet,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(cur.clone());
        if cur.len() == depth {
            return;
        }
        for i in from..pool.len() {
            cur.push(pool[i]);
            if is_feasible(cur, cons) {
                rec(pool, i + 1, cur, depth, cons, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, 0, &mut Vec::new(), depth, cons, &mut out);
    out
}

fn sorted_ground(ground: &[usize]) -> Vec<usize> {
    let mut g = ground.to_vec();
    g.sort_unstable();
    g.dedup();
    g
}

/// Knapsack + cardinality greedy with partial enumeration.
///
/// Runs gain greedy and density greedy from every feasible seed of at most
/// `enum_depth` items (the empty seed included) and keeps the best result.
pub fn greedy_knapsack<F>(f: F, ground: &[usize], cons: &ConstraintSet, enum_depth: usize) -> SolverResult
where
    F: Fn(&[usize]) -> f64,
{
    let ground = sorted_ground(ground);
    let pool: Vec<usize> = ground.iter().copied().filter(|&x| cons.eligible(x)).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut evaluations = 0;
    for seed in seeds(&pool, cons, enum_depth) {
        for rule in [Rule::Gain, Rule::Density] {
            let (order, value, evals) = greedy_from(&f, &pool, cons, &seed, rule);
            evaluations += evals;
            if best.as_ref().is_none_or(|(_, v)| value > *v) {
                best = Some((order, value));
            }
        }
    }
    let (order, objective) = best.unwrap_or_default();
    SolverResult {
        items: sorted_ground(&order),
        order,
        objective,
        evaluations,
        method: format!("greedy_knapsack(depth={enum_depth})"),
    }
}

/// Partition matroid + knapsack + cardinality greedy, optionally followed by
/// single-swap local search (budget `50 * |ground|` swaps).
pub fn greedy_matroid_knapsack<F>(f: F, ground: &[usize], cons: &ConstraintSet, local_search: bool) -> SolverResult
where
    F: Fn(&[usize]) -> f64,
{
    let ground = sorted_ground(ground);
    let pool: Vec<usize> = ground.iter().copied().filter(|&x| cons.eligible(x)).collect();
    let (mut order, mut value, mut evaluations) = greedy_from(&f, &pool, cons, &[], Rule::Gain);
    let mut items = sorted_ground(&order);
    if local_search {
        let budget = 50 * ground.len();
        let mut swaps = 0;
        'search: while swaps < budget {
            // Additions first, then remove-one/add-one swaps.
            let removals: Vec<Option<usize>> = std::iter::once(None).chain((0..items.len()).map(Some)).collect();
            for r in removals {
                for &a in &pool {
                    if items.contains(&a) {
                        continue;
                    }
                    let mut cand: Vec<usize> = items.clone();
                    if let Some(r) = r {
                        cand.remove(r);
                    }
                    cand.push(a);
                    if !is_feasible(&cand, cons) {
                        continue;
                    }
                    cand.sort_unstable();
                    let v = f(&cand);
                    evaluations += 1;
                    if v > value + SWAP_IMPROVEMENT {
                        if let Some(r) = r {
                            order.retain(|&x| x != items[r]);
                        }
                        order.push(a);
                        items = cand;
                        value = v;
                        swaps += 1;
                        continue 'search;
                    }
                }
            }
            break;
        }
    }
    SolverResult {
        items,
        order,
        objective: value,
        evaluations,
        method: if local_search {
            "greedy_matroid_knapsack+swap".into()
        } else {
            "greedy_matroid_knapsack".into()
        },
    }
}

/// Max-gain greedy with one item per class and at most `cardinality` items.
pub fn greedy_partition<F>(f: F, ground: &[usize], classes: &[usize], cardinality: usize) -> SolverResult
where
    F: Fn(&[usize]) -> f64,
{
    let cons = ConstraintSet::cardinality_only(classes.len(), cardinality).with_partition(classes.to_vec());
    let mut res = greedy_matroid_knapsack(f, ground, &cons, false);
    res.method = "greedy_partition".into();
    res
}

/// Exact maximizer by enumerating feasible subsets; the lexicographically
/// first of tied subsets wins.
pub fn brute_force_subset<F>(f: F, ground: &[usize], cons: &ConstraintSet) -> Result<SolverResult>
where
    F: Fn(&[usize]) -> f64,
{
    let ground = sorted_ground(ground);
    if ground.len() > BRUTE_FORCE_LIMIT {
        return Err(CascadiaError::ExactLimit {
            size: ground.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    struct Search<'a, F> {
        f: &'a F,
        ground: &'a [usize],
        cons: &'a ConstraintSet,
        best: (Vec<usize>, f64),
        evaluations: usize,
    }
    impl<F: Fn(&[usize]) -> f64> Search<'_, F> {
        // Depth-first in item order visits subsets lexicographically.
        fn rec(&mut self, from: usize, cur: &mut Vec<usize>) {
            let v = (self.f)(cur);
            self.evaluations += 1;
            if v > self.best.1 + TIE_TOL {
                self.best = (cur.clone(), v);
            }
            for i in from..self.ground.len() {
                cur.push(self.ground[i]);
                if is_feasible(cur, self.cons) {
                    self.rec(i + 1, cur);
                }
                cur.pop();
            }
        }
    }
    let mut s = Search {
        f: &f,
        ground: &ground,
        cons,
        best: (Vec::new(), f64::NEG_INFINITY),
        evaluations: 0,
    };
    s.rec(0, &mut Vec::new());
    Ok(SolverResult {
        order: s.best.0.clone(),
        items: s.best.0,
        objective: s.best.1,
        evaluations: s.evaluations,
        method: "brute_force".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modular(values: &[f64]) -> impl Fn(&[usize]) -> f64 + '_ {
        move |s: &[usize]| s.iter().map(|&i| values[i]).sum()
    }

    #[test]
    fn loose_budget_takes_everything() {
        let vals = [1.0, 2.0, 3.0, 0.5];
        let cons = ConstraintSet::from_continuations(&[0.9; 4], 0.01, 4);
        let r = greedy_knapsack(modular(&vals), &[0, 1, 2, 3], &cons, 1);
        assert_eq!(r.items, vec![0, 1, 2, 3]);
        assert!((r.objective - 6.5).abs() < 1e-12);
    }

    #[test]
    fn rho_one_admits_only_certain_continuation() {
        let vals = [5.0, 1.0, 3.0];
        let cons = ConstraintSet::from_continuations(&[0.99, 1.0, 0.5], 1.0, 3);
        let r = greedy_knapsack(modular(&vals), &[0, 1, 2], &cons, 2);
        assert_eq!(r.items, vec![1]);
    }

    #[test]
    fn excluded_and_infinite_weight_items_are_skipped() {
        let vals = [5.0, 1.0, 3.0];
        let cons = ConstraintSet::from_continuations(&[0.0, 0.9, 0.9], 0.1, 3).with_excluded(2);
        let r = greedy_knapsack(modular(&vals), &[0, 1, 2], &cons, 1);
        assert_eq!(r.items, vec![1]);
        assert!(is_feasible(&r.items, &cons));
        assert!(!is_feasible(&[0], &cons));
        assert!(!is_feasible(&[2], &cons));
    }

    #[test]
    fn density_beats_plain_gain() {
        // One heavy high-value item versus two light ones that together win.
        let vals = [10.0, 6.0, 6.0];
        let cons = ConstraintSet {
            log_budget: 1.0,
            item_weights: vec![1.0, 0.5, 0.5],
            cardinality: 3,
            partition_classes: None,
            excluded: None,
        };
        let r = greedy_knapsack(modular(&vals), &[0, 1, 2], &cons, 0);
        assert_eq!(r.items, vec![1, 2]);
        let bf = brute_force_subset(modular(&vals), &[0, 1, 2], &cons).unwrap();
        assert_eq!(bf.items, r.items);
    }

    #[test]
    fn uniform_weight_modular_is_optimal() {
        let vals = [0.3, 0.9, 0.1, 0.7, 0.5];
        let cons = ConstraintSet::from_continuations(&[0.8; 5], 0.8f64.powi(3), 5);
        let g = greedy_knapsack(modular(&vals), &[0, 1, 2, 3, 4], &cons, 0);
        let bf = brute_force_subset(modular(&vals), &[0, 1, 2, 3, 4], &cons).unwrap();
        assert_eq!(g.items, vec![1, 3, 4]);
        assert_eq!(bf.items, g.items);
    }

    #[test]
    fn partition_greedy_picks_best_per_class() {
        // items 0..6, class = item / 2
        let vals = [1.0, 2.0, 5.0, 4.0, 0.5, 0.7];
        let classes = vec![0, 0, 1, 1, 2, 2];
        let r = greedy_partition(modular(&vals), &[0, 1, 2, 3, 4, 5], &classes, 3);
        assert_eq!(r.items, vec![1, 2, 5]);
        let one = greedy_partition(modular(&vals), &[0, 1, 2, 3, 4, 5], &classes, 1);
        assert_eq!(one.items, vec![2]);
    }

    #[test]
    fn copies_of_one_question_yield_one_pick() {
        // Four copies of the same question: extra copies add nothing.
        let f = |s: &[usize]| if s.is_empty() { 0.0 } else { 1.0 };
        let cons = ConstraintSet::cardinality_only(4, 4).with_partition(vec![0, 1, 2, 3]);
        let r = greedy_matroid_knapsack(f, &[0, 1, 2, 3], &cons, true);
        assert_eq!(r.items, vec![0]);
    }

    #[test]
    fn local_search_escapes_greedy_trap() {
        // Coverage: 0 -> {1,2,3}, 1 -> {1,2,5}, 2 -> {3,4}; items 0 and 2 share a class.
        let covers: [&[u32]; 3] = [&[1, 2, 3], &[1, 2, 5], &[3, 4]];
        let f = |s: &[usize]| {
            let mut seen: Vec<u32> = s.iter().flat_map(|&i| covers[i].iter().copied()).collect();
            seen.sort_unstable();
            seen.dedup();
            seen.len() as f64
        };
        let cons = ConstraintSet::cardinality_only(3, 2).with_partition(vec![0, 1, 0]);
        let plain = greedy_matroid_knapsack(f, &[0, 1, 2], &cons, false);
        assert_eq!((plain.items.clone(), plain.objective), (vec![0, 1], 4.0));
        let ls = greedy_matroid_knapsack(f, &[0, 1, 2], &cons, true);
        assert_eq!((ls.items, ls.objective), (vec![1, 2], 5.0));
    }

    #[test]
    fn brute_force_basics() {
        let empty = brute_force_subset(modular(&[]), &[], &ConstraintSet::cardinality_only(0, 3)).unwrap();
        assert!(empty.items.is_empty());
        assert_eq!(empty.objective, 0.0);
        let vals = [1.0, 1.0, 1.0, 1.0];
        let r = brute_force_subset(modular(&vals), &[3, 2, 1, 0], &ConstraintSet::cardinality_only(4, 2)).unwrap();
        assert_eq!(r.items, vec![0, 1]);
        let big: Vec<usize> = (0..25).collect();
        assert!(brute_force_subset(modular(&[0.0; 25]), &big, &ConstraintSet::cardinality_only(25, 1)).is_err());
    }
}
