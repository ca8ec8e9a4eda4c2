//! Sweeps the weight grid over a range of cluster counts and picks the best
//! decomposition by coupling, cohesion and complexity.
//!
//! cargo run --example search

use mono2ddd::decompose::search_decompositions;
use mono2ddd::ingest::{parse_accesses, validate_model};
use mono2ddd::measures::rank_decompositions;

fn main() -> mono2ddd::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/quizzes/accesses.json");
    let model = validate_model(parse_accesses(&std::fs::read_to_string(path)?)?, vec![]);

    let candidates = search_decompositions(&model, &[2, 3, 4], 0.25)?;
    println!("{} candidates", candidates.len());

    let best = rank_decompositions(&candidates, 10).expect("at least one candidate");
    let r = &best.report;
    println!(
        "weights {:?}, n = {}: coupling {:.3}, cohesion {:.3}, complexity {:.3}",
        best.decomposition.params().weights.to_array(),
        best.decomposition.params().n,
        r.coupling,
        r.cohesion,
        r.complexity
    );
    for c in best.decomposition.clusters() {
        println!("{}: {}", c.name, c.entities.iter().cloned().collect::<Vec<_>>().join(", "));
    }
    Ok(())
}
