//! The knapsack, partition and matroid-knapsack greedy solvers against brute force.
//!
//! `cargo run --release --example greedy_solvers`

use cascadia::harness::random_instance;
use cascadia::solvers::{
    brute_force_subset, greedy_knapsack, greedy_matroid_knapsack, greedy_partition, ConstraintSet,
};
use cascadia::UtilityFunction;

fn main() -> cascadia::Result<()> {
    let inst = random_instance(10, 10, 9);
    let g = UtilityFunction::from_instance(&inst)?;
    let f = |s: &[usize]| g.value(s);
    let ground: Vec<usize> = (0..inst.n()).collect();
    let cont: Vec<f64> = inst.questions.iter().map(|q| q.agg_continuation()).collect();

    let cons = ConstraintSet::from_continuations(&cont, 0.2, 5);
    let best = brute_force_subset(f, &ground, &cons)?;
    println!("brute force       {:.4} {:?}", best.objective, best.items);
    for depth in 0..=3 {
        let r = greedy_knapsack(f, &ground, &cons, depth);
        println!(
            "knapsack depth {depth}  {:.4} {:?} ({} calls)",
            r.objective, r.order, r.evaluations
        );
    }

    let classes: Vec<usize> = (0..inst.n()).map(|i| i % 4).collect();
    let r = greedy_partition(f, &ground, &classes, 4);
    println!("partition         {:.4} {:?}", r.objective, r.items);

    let mixed = cons.with_partition(classes);
    for ls in [false, true] {
        let r = greedy_matroid_knapsack(f, &ground, &mixed, ls);
        println!("matroid+knapsack  {:.4} {:?} (local search {ls})", r.objective, r.items);
    }
    Ok(())
}
