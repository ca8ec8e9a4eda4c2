use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Access, EntityStructure, Functionality, Mode, ReferenceKind};
use crate::error::{Error, Result};
use crate::ident::{is_identifier, is_type_name};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AccessesDoc {
    functionalities: Vec<RawFunctionality>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunctionality {
    name: String,
    trace: Vec<(String, String)>,
}

fn contract(path: String, message: impl Into<String>) -> Error {
    Error::Contract { path, message: message.into() }
}

/// Parses the accesses file. `RW` entries expand to a read followed by a
/// write of the same entity.
pub fn parse_accesses(text: &str) -> Result<Vec<Functionality>> {
    let doc: AccessesDoc = serde_json::from_str(text)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(doc.functionalities.len());
    for (i, raw) in doc.functionalities.into_iter().enumerate() {
        let at = format!("functionalities[{i}]");
        if raw.name.is_empty() {
            return Err(contract(format!("{at}.name"), "empty functionality name"));
        }
        if !seen.insert(raw.name.clone()) {
            return Err(contract(
                format!("{at}.name"),
                format!("duplicate functionality name \"{}\"", raw.name),
            ));
        }
        if raw.trace.is_empty() {
            return Err(contract(format!("{at}.trace"), "empty trace"));
        }
        let mut trace = Vec::with_capacity(raw.trace.len());
        for (j, (entity, mode)) in raw.trace.into_iter().enumerate() {
            let at = format!("{at}.trace[{j}]");
            if !is_identifier(&entity) {
                return Err(contract(at, format!("invalid entity name \"{entity}\"")));
            }
            match mode.as_str() {
                "R" => trace.push(Access::new(entity, Mode::R)),
                "W" => trace.push(Access::new(entity, Mode::W)),
                "RW" => {
                    trace.push(Access::new(entity.clone(), Mode::R));
                    trace.push(Access::new(entity, Mode::W));
                }
                other => return Err(contract(at, format!("unknown access mode \"{other}\""))),
            }
        }
        out.push(Functionality { name: raw.name, trace });
    }
    Ok(out)
}

#[derive(Serialize)]
struct AccessesOut<'a> {
    functionalities: Vec<FunctionalityOut<'a>>,
}

#[derive(Serialize)]
struct FunctionalityOut<'a> {
    name: &'a str,
    trace: Vec<(&'a str, &'static str)>,
}

pub(super) fn accesses_to_json(functionalities: &[Functionality]) -> String {
    let doc = AccessesOut {
        functionalities: functionalities
            .iter()
            .map(|f| FunctionalityOut {
                name: &f.name,
                trace: f.trace.iter().map(|a| (a.entity.as_str(), a.mode.as_str())).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("accesses serialize") + "\n"
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    entities: Vec<EntityStructure>,
}

/// Parses the structure JSON file.
pub fn parse_structure_json(text: &str) -> Result<Vec<EntityStructure>> {
    let doc: StructureDoc = serde_json::from_str(text)?;
    check_structures(&doc.entities)?;
    Ok(doc.entities)
}

pub(super) fn structure_to_json<'a>(entities: impl Iterator<Item = &'a EntityStructure>) -> String {
    let doc = StructureDoc { entities: entities.cloned().collect() };
    serde_json::to_string_pretty(&doc).expect("structure serialize") + "\n"
}

/// Rules shared by both structure formats.
pub(super) fn check_structures(entities: &[EntityStructure]) -> Result<()> {
    let mut names = HashSet::new();
    for e in entities {
        if !is_identifier(&e.name) {
            return Err(Error::InvalidIdentifier(e.name.clone()));
        }
        if !names.insert(e.name.as_str()) {
            return Err(Error::DuplicateEntity(e.name.clone()));
        }
        let mut fields = HashSet::new();
        for a in &e.attributes {
            if !is_identifier(&a.name) {
                return Err(Error::InvalidIdentifier(a.name.clone()));
            }
            if !is_type_name(&a.ty) {
                return Err(Error::InvalidIdentifier(a.ty.clone()));
            }
            if !fields.insert(a.name.as_str()) {
                return Err(Error::DuplicateField { entity: e.name.clone(), field: a.name.clone() });
            }
        }
        for r in &e.references {
            if !is_identifier(&r.field) {
                return Err(Error::InvalidIdentifier(r.field.clone()));
            }
            if !is_identifier(&r.target) {
                return Err(Error::InvalidIdentifier(r.target.clone()));
            }
            if !fields.insert(r.field.as_str()) {
                return Err(Error::DuplicateField { entity: e.name.clone(), field: r.field.clone() });
            }
        }
        let inheritance = e
            .references
            .iter()
            .filter(|r| r.kind == ReferenceKind::Inheritance)
            .count();
        if inheritance > 1 {
            return Err(Error::MultipleInheritance(e.name.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Reference;

    #[test]
    fn parses_trace_in_order() {
        let fs = parse_accesses(
            r#"{"functionalities": [{"name": "f1", "trace": [["A","R"],["B","W"]]}]}"#,
        )
        .unwrap();
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].trace, vec![Access::read("A"), Access::write("B")]);
    }

    #[test]
    fn empty_list_is_empty_result() {
        assert!(parse_accesses(r#"{"functionalities": []}"#).unwrap().is_empty());
    }

    #[test]
    fn rw_expands_to_read_then_write() {
        let fs = parse_accesses(r#"{"functionalities": [{"name": "f", "trace": [["A","RW"]]}]}"#)
            .unwrap();
        assert_eq!(fs[0].trace, vec![Access::read("A"), Access::write("A")]);
    }

    #[test]
    fn unknown_mode_reports_location() {
        let err = parse_accesses(
            r#"{"functionalities": [{"name": "f", "trace": [["A","R"],["B","X"]]}]}"#,
        )
        .unwrap_err();
        match err {
            Error::Contract { path, message } => {
                assert_eq!(path, "functionalities[0].trace[1]");
                assert!(message.contains("unknown access mode"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_functionality_reports_location() {
        let err = parse_accesses(
            r#"{"functionalities": [{"name": "f", "trace": [["A","R"]]},{"name": "f", "trace": [["A","W"]]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract { ref path, .. } if path == "functionalities[1].name"));
    }

    #[test]
    fn malformed_document_is_json_error() {
        let err = parse_accesses(r#"{"functionalities": [ {"name": "f" "#).unwrap_err();
        assert!(matches!(err, Error::Json(_)));
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn structure_json_with_references() {
        let es = parse_structure_json(
            r#"{"entities": [
                {"name": "Topic", "attributes": [{"name": "name", "type": "String"}],
                 "references": [{"field": "question", "target": "Question", "kind": "association"}]},
                {"name": "Question"}
            ]}"#,
        )
        .unwrap();
        assert_eq!(es[0].references, vec![Reference::association("question", "Question")]);
        assert!(es[1].attributes.is_empty() && es[1].references.is_empty());
    }

    #[test]
    fn structure_json_rejects_two_inheritance_refs() {
        let err = parse_structure_json(
            r#"{"entities": [{"name": "X", "references": [
                {"field": "a", "target": "A", "kind": "inheritance"},
                {"field": "b", "target": "B", "kind": "inheritance"}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MultipleInheritance(ref e) if e == "X"));
    }

    #[test]
    fn structure_json_rejects_duplicates() {
        let err = parse_structure_json(r#"{"entities": [{"name": "X"}, {"name": "X"}]}"#).unwrap_err();
        assert!(matches!(err, Error::DuplicateEntity(_)));
        let err = parse_structure_json(
            r#"{"entities": [{"name": "X", "attributes": [{"name":"a","type":"T"}],
                "references": [{"field":"a","target":"Y","kind":"association"}]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateField { .. }));
    }
}
