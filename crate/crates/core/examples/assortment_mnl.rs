//! Ordering products on a page for expected MNL revenue.
//!
//! `cargo run --release --example assortment_mnl`

use cascadia::assortment::{optimize_assortment, Catalog};
use cascadia::policies::{PolicyKind, PolicySpec};

const CATALOG: &str = r#"{
  "display_slots": 3,
  "products": [
    {"id": 101, "consider_rate": 0.7, "c_consider": 0.6, "c_skip": 0.8, "weight": 2.0},
    {"id": 102, "consider_rate": 0.4, "c_consider": 0.7, "c_skip": 0.9, "weight": 1.0},
    {"id": 103, "consider_rate": 0.9, "c_consider": 0.3, "c_skip": 0.5, "weight": 0.5},
    {"id": 104, "consider_rate": 0.5, "c_consider": 0.8, "c_skip": 0.8, "weight": 1.5},
    {"id": 105, "consider_rate": 0.6, "c_consider": 0.5, "c_skip": 0.7, "weight": 3.0}
  ]
}"#;

fn main() -> cascadia::Result<()> {
    let cat = Catalog::from_json_str(CATALOG)?;
    for kind in [PolicyKind::Alg2General, PolicyKind::Random, PolicyKind::ExactOptimal] {
        let r = optimize_assortment(&cat, &PolicySpec::new(kind).with_rho(0.3))?;
        let ids: Vec<i64> = r.output.sequence.iter().map(|&i| cat.products[i].id).collect();
        println!("{:<14} {ids:?} revenue {:.4}", kind.name(), r.expected_revenue);
    }
    Ok(())
}
