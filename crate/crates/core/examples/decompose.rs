//! Similarity matrix, dendrogram and a cut into two clusters.
//!
//! cargo run --example decompose

use mono2ddd::decompose::{average_linkage, build_similarity, cluster, SimilarityWeights};
use mono2ddd::ingest::{validate_model, Access, Functionality};

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

    let weights = SimilarityWeights::new(0.5, 0.0, 0.0, 0.5)?;
    let sim = build_similarity(&model, weights)?;
    for (i, a) in sim.entities().iter().enumerate() {
        let row: Vec<String> = (0..sim.len()).map(|j| format!("{:.3}", sim.get(i, j))).collect();
        println!("{a} {}", row.join(" "));
    }

    let dendrogram = average_linkage(&sim);
    for m in dendrogram.merges() {
        println!("{m:?}");
    }

    let d = cluster(&sim, 2, weights)?;
    print!("{}", d.to_json());
    Ok(())
}
