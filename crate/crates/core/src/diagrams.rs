//! Graphviz DOT for context maps and decompositions, and a line-per-step
//! lane listing for coordinations.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::cml::CmlDocument;
use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::ingest::MonolithModel;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Directed graph of the context map: one node per bounded context, one
/// edge per relationship from upstream to downstream.
pub fn context_map_dot(doc: &CmlDocument) -> String {
    let mut out = format!("digraph {} {{\n", quote(&doc.context_map.name));
    let mut nodes: Vec<&str> = Vec::new();
    let names = doc
        .contexts
        .iter()
        .map(|c| c.name.as_str())
        .chain(doc.context_map.contains.iter().map(String::as_str))
        .chain(doc.context_map.relationships.iter().flat_map(|r| [r.upstream.as_str(), r.downstream.as_str()]));
    for n in names {
        if !nodes.contains(&n) {
            nodes.push(n);
        }
    }
    for n in nodes {
        let _ = writeln!(out, "    {};", quote(n));
    }
    for r in &doc.context_map.relationships {
        let _ = writeln!(out, "    {} -> {};", quote(&r.upstream), quote(&r.downstream));
    }
    out.push_str("}\n");
    out
}

/// Undirected graph of a decomposition: one node per cluster labelled with
/// its size, and an edge between two clusters labelled with the number of
/// functionalities that access both.
pub fn decomposition_dot(model: &MonolithModel, decomposition: &Decomposition) -> Result<String> {
    decomposition.check_against(model)?;
    let owner = decomposition.entity_map();
    let touched: Vec<BTreeSet<&str>> = model
        .functionalities()
        .iter()
        .map(|f| f.trace.iter().filter_map(|a| owner.get(&a.entity).map(String::as_str)).collect())
        .collect();
    let clusters = decomposition.clusters();
    let mut out = String::from("graph \"decomposition\" {\n");
    for c in clusters {
        let label = format!("{} ({})", c.name, c.entities.len());
        let _ = writeln!(out, "    {} [label={}];", quote(&c.name), quote(&label));
    }
    for (i, a) in clusters.iter().enumerate() {
        for b in &clusters[i + 1..] {
            let shared = touched.iter().filter(|t| t.contains(a.name.as_str()) && t.contains(b.name.as_str())).count();
            if shared > 0 {
                let _ = writeln!(out, "    {} -- {} [label=\"{shared}\"];", quote(&a.name), quote(&b.name));
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// One `<context>: <service>.<operation>` line per step of the named
/// coordination.
pub fn coordination_bpmn(doc: &CmlDocument, coordination: &str) -> Result<String> {
    let k = doc
        .coordination(coordination)
        .ok_or_else(|| Error::UnknownCoordination(coordination.to_string()))?;
    let mut out = String::new();
    for s in &k.steps {
        let _ = writeln!(out, "{}: {}.{}", s.context, s.service, s.operation);
    }
    Ok(out)
}
