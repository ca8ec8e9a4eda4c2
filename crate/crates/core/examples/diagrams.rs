//! DOT for a context map and a decomposition, and the step listing of one
//! coordination.
//!
//! cargo run --example diagrams | dot -Tsvg  (first graph only)

use mono2ddd::cml::parse;
use mono2ddd::decompose::Decomposition;
use mono2ddd::diagrams::{context_map_dot, coordination_bpmn, decomposition_dot};
use mono2ddd::ingest::{parse_accesses, validate_model};

fn main() -> mono2ddd::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/quizzes");
    let read = |f: &str| std::fs::read_to_string(format!("{dir}/{f}"));

    let doc = parse(&read("model.cml")?)?;
    print!("{}", context_map_dot(&doc));

    let model = validate_model(parse_accesses(&read("accesses.json")?)?, vec![]);
    let d = Decomposition::from_json(&read("decomposition.json")?)?;
    print!("{}", decomposition_dot(&model, &d)?);

    for (ctx, k) in doc.coordinations() {
        println!("-- {} (owned by {})", k.name, ctx.name);
        print!("{}", coordination_bpmn(&doc, &k.name)?);
    }
    Ok(())
}
