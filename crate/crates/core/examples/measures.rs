//! Cohesion, coupling and complexity of a fixed decomposition.
//!
//! cargo run --example measures

use std::collections::BTreeSet;

use mono2ddd::decompose::{Decomposition, DecompositionParams, SimilarityWeights};
use mono2ddd::ingest::{validate_model, Access, Functionality};
use mono2ddd::measures::{assess, cohesion, complexity};

fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn main() -> mono2ddd::Result<()> {
    let model = validate_model(
        vec![
            Functionality::new("f1", vec![Access::read("A"), Access::write("B"), Access::write("A")]),
            Functionality::new("f2", vec![Access::read("C"), Access::read("D"), Access::write("C")]),
            Functionality::new("f3", vec![Access::read("A"), Access::write("C")]),
            Functionality::new("f4", vec![Access::read("C"), Access::write("A"), Access::read("B")]),
        ],
        vec![],
    );
    let d = Decomposition::from_groups(
        vec![set(&["A", "B"]), set(&["C", "D"])],
        DecompositionParams { weights: SimilarityWeights::access_only(), n: 2 },
    )?;

    let report = assess(&model, &d)?;
    print!("{}", report.to_tsv());
    for (f, c) in &report.functionality_complexity {
        println!("complexity({f}) = {c:.3}");
    }

    println!("cohesion(Cluster0) = {:.4}", cohesion(&model, &d, "Cluster0")?);
    println!("complexity(f4) = {:.4}", complexity(&model, &d, "f4")?);
    Ok(())
}
