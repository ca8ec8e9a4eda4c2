//! Turns traces into sagas over a decomposition and reports how many
//! remote interactions are saved.
//!
//! cargo run --example sagas

use std::collections::BTreeMap;

use mono2ddd::decompose::Decomposition;
use mono2ddd::ingest::{parse_accesses, validate_model, Access};
use mono2ddd::saga::{collapse_runs, merge_steps, refactor_all, stats_tsv, OrchestratorPolicy};

fn main() -> mono2ddd::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/quizzes");
    let model = validate_model(parse_accesses(&std::fs::read_to_string(format!("{dir}/accesses.json"))?)?, vec![]);
    let d = Decomposition::from_json(&std::fs::read_to_string(format!("{dir}/decomposition.json"))?)?;

    let results = refactor_all(&model, &d, OrchestratorPolicy::MostAccesses)?;
    for (saga, _) in &results {
        let steps: Vec<String> = saga
            .steps
            .iter()
            .map(|s| format!("{}[{}]", s.cluster, s.accesses.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")))
            .collect();
        println!("{} (orchestrated by {}): {}", saga.functionality, saga.orchestrator, steps.join(" -> "));
    }
    let stats: Vec<_> = results.into_iter().map(|(_, s)| s).collect();
    print!("{}", stats_tsv(&stats));

    // the merge step on its own: the third step rejoins the first one since
    // nothing between them touches the same entities
    let owner: BTreeMap<String, String> =
        [("X", "c1"), ("Y", "c2"), ("Z", "c1")].iter().map(|(e, c)| (e.to_string(), c.to_string())).collect();
    let trace = [Access::read("X"), Access::write("Y"), Access::read("Z")];
    let collapsed = collapse_runs(&trace, &owner)?;
    let merged = merge_steps(collapsed.clone());
    println!("{} steps -> {} steps", collapsed.len(), merged.len());
    Ok(())
}
