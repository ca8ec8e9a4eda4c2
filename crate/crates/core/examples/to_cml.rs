//! Maps a decomposition and its sagas onto a DDD model and prints it as
//! context mapper text, once per naming heuristic.
//!
//! cargo run --example to_cml

use mono2ddd::cml::{emit_model, parse, validate};
use mono2ddd::decompose::Decomposition;
use mono2ddd::dddmap::{generate, NamingHeuristic};
use mono2ddd::ingest::{parse_accesses, parse_structure, validate_model};
use mono2ddd::saga::{refactor_all, OrchestratorPolicy};

fn main() -> mono2ddd::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixture_a");
    let read = |f: &str| std::fs::read_to_string(format!("{dir}/{f}"));
    let model = validate_model(parse_accesses(&read("accesses.json")?)?, parse_structure(&read("structure.json")?)?);
    let d = Decomposition::from_json(&read("decomposition.json")?)?;
    let sagas: Vec<_> = refactor_all(&model, &d, OrchestratorPolicy::FirstStep)?.into_iter().map(|(s, _)| s).collect();

    for naming in NamingHeuristic::ALL {
        let ddd = generate(&model, &d, &sagas, naming)?;
        println!("// {naming}: {} operations", ddd.operation_count());
        if naming == NamingHeuristic::FullTrace {
            let text = emit_model(&ddd)?;
            print!("{text}");
            let doc = parse(&text)?;
            assert!(validate(&doc).is_empty());
        }
    }
    Ok(())
}
