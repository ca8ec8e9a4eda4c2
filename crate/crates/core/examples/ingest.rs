//! Loads access traces and a structure file, then prints what was found.
//!
//! cargo run --example ingest

use mono2ddd::ingest::{parse_accesses, parse_structure, validate_model};

fn main() -> mono2ddd::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/quizzes");
    let traces = std::fs::read_to_string(format!("{dir}/accesses.json"))?;
    let structure = std::fs::read_to_string(format!("{dir}/structure.txt"))?;

    let model = validate_model(parse_accesses(&traces)?, parse_structure(&structure)?);
    for f in model.functionalities() {
        let trace: Vec<String> = f.trace.iter().map(ToString::to_string).collect();
        println!("{:<20} {}", f.name, trace.join(" "));
    }
    println!("accessed: {}", model.accessed_entities().join(", "));
    for e in model.entities() {
        println!("{} ({} attributes, {} references)", e.name, e.attributes.len(), e.references.len());
    }
    for w in model.warnings() {
        println!("warning: {w}");
    }

    // malformed input is rejected with a location
    let bad = r#"{"functionalities":[{"name":"f","trace":[["A","Q"]]}]}"#;
    if let Err(e) = parse_accesses(bad) {
        println!("rejected: {e}");
    }
    Ok(())
}
