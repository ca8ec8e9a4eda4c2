//! Merges two bounded contexts, then splits an aggregate of the result.
//!
//! cargo run --example refactor

use mono2ddd::cml::{emit, merge_bounded_contexts, parse, split_aggregate, validate};

fn main() -> mono2ddd::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/quizzes/model.cml");
    let doc = parse(&std::fs::read_to_string(path)?)?;

    let merged = merge_bounded_contexts(&doc, "Cluster0", "Cluster1")?;
    for d in validate(&merged) {
        println!("diagnostic: {d}");
    }
    let ctx = merged.context("Cluster0_Cluster1").expect("merged context");
    let names: Vec<&str> = ctx.aggregates.iter().flat_map(|g| &g.entities).map(|e| e.name.as_str()).collect();
    println!("merged entities: {}", names.join(", "));

    let parts = vec![
        vec!["Course".to_string(), "Topic".to_string()],
        vec!["Question".to_string(), "MultipleChoiceQuestion".to_string(), "Quiz".to_string()],
    ];
    let split = split_aggregate(&merged, "Cluster0_Cluster1", &parts)?;
    print!("{}", emit(&split)?);

    // a partition that leaves an entity out is refused
    if let Err(e) = split_aggregate(&merged, "Cluster0_Cluster1", &parts[..1]) {
        println!("// rejected: {e}");
    }
    Ok(())
}
