//! Oracles shared by the integration tests. Nothing here calls the evaluator.
#![allow(dead_code)]

use cascadia::Instance;

/// Sum of Shannon entropies (nats) of the attributes covered by `answered`.
pub fn entropy_oracle(inst: &Instance, answered: &[usize]) -> f64 {
    let mut attrs: Vec<usize> = answered
        .iter()
        .flat_map(|&q| inst.questions[q].attributes.iter().copied())
        .collect();
    attrs.sort_unstable();
    attrs.dedup();
    attrs
        .iter()
        .map(|&a| {
            inst.attributes[a]
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| -p * p.ln())
                .sum::<f64>()
        })
        .sum()
}

/// Branch parameters of the cascade for one read slot.
#[derive(Clone, Copy, Debug)]
pub struct Branches {
    pub answer: f64,
    pub c_answer: f64,
    pub pna: f64,
    pub c_pna: f64,
}

/// Expected `g` by walking the full tree: at each read slot the customer
/// answers and continues, answers and leaves, skips and continues, skips
/// and leaves, or leaves at once.
pub fn branch_tree<G>(seq: &[usize], branches: &dyn Fn(usize, usize) -> Branches, g: &G) -> f64
where
    G: Fn(&[usize]) -> f64,
{
    fn rec<G: Fn(&[usize]) -> f64>(
        seq: &[usize],
        slot: usize,
        answered: &mut Vec<usize>,
        mass: f64,
        branches: &dyn Fn(usize, usize) -> Branches,
        g: &G,
    ) -> f64 {
        if slot == seq.len() || mass == 0.0 {
            return mass * g(answered);
        }
        let b = branches(seq[slot], slot);
        let mut total = 0.0;
        answered.push(seq[slot]);
        total += rec(seq, slot + 1, answered, mass * b.answer * b.c_answer, branches, g);
        total += mass * b.answer * (1.0 - b.c_answer) * g(answered);
        answered.pop();
        total += rec(seq, slot + 1, answered, mass * b.pna * b.c_pna, branches, g);
        total += mass * b.pna * (1.0 - b.c_pna) * g(answered);
        total += mass * (1.0 - b.answer - b.pna) * g(answered);
        total
    }
    rec(seq, 0, &mut Vec::new(), 1.0, branches, g)
}

/// `E[g(R)]` with item `i` included independently at `probs[i]`, by listing all subsets.
pub fn independent_oracle<G>(items: &[usize], probs: &[f64], g: &G) -> f64
where
    G: Fn(&[usize]) -> f64,
{
    let k = items.len();
    (0u32..1 << k)
        .map(|mask| {
            let mut pr = 1.0;
            let mut set = Vec::new();
            for i in 0..k {
                if mask >> i & 1 == 1 {
                    pr *= probs[i];
                    set.push(items[i]);
                } else {
                    pr *= 1.0 - probs[i];
                }
            }
            pr * g(&set)
        })
        .sum()
}

/// Every ordered sequence of distinct ids from `0..n` with length exactly `len`.
pub fn sequences(n: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for q in 0..n {
            if !cur.contains(&q) {
                cur.push(q);
                rec(n, len, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, len, &mut Vec::new(), &mut out);
    out
}

/// Nonincreasing decay vector with a leading 1.
pub fn decay_vector(rng: &mut impl rand::Rng, len: usize) -> Vec<f64> {
    let mut rest: Vec<f64> = (1..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    rest.sort_by(|a, b| b.partial_cmp(a).unwrap());
    std::iter::once(1.0).chain(rest).collect()
}
