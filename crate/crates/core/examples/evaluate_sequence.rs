//! Exact expected utility of a hand-built questionnaire.
//!
//! `cargo run --example evaluate_sequence`

use cascadia::evaluator::{eval_exact, Variant};
use cascadia::{Instance, Question, Sequence, UtilityFunction, UtilityKind};

fn main() -> cascadia::Result<()> {
    // Three attributes: a fair coin, a skewed die face, a near-certain flag.
    let attributes = vec![vec![0.5, 0.5], vec![0.4, 0.3, 0.2, 0.1], vec![0.95, 0.05]];
    let questions = vec![
        Question::new(0, 0.6, 0.2, 0.8, 0.6).with_attributes(vec![0]),
        Question::new(1, 0.4, 0.3, 0.7, 0.5).with_attributes(vec![1]),
        Question::new(2, 0.9, 0.05, 0.9, 0.9).with_attributes(vec![2]),
    ];
    let inst = Instance::new(questions, attributes, 3, UtilityKind::Entropy);
    let g = UtilityFunction::from_instance(&inst)?;

    for order in [vec![0, 1, 2], vec![1, 0, 2], vec![2, 1, 0]] {
        let seq = Sequence::new(order.clone(), &inst)?;
        let r = eval_exact(&seq, &inst, &g, Variant::Basic)?;
        println!(
            "{order:?}: f = {:.4} nats, reach = {:?}, answered = {:.3}",
            r.value,
            r.reachability
                .iter()
                .map(|x| (x * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>(),
            r.expected_answered
        );
    }
    Ok(())
}
