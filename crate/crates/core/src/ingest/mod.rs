//! Input contract: functionality access traces plus entity structure.
//!
//! Traces come from the accesses JSON file. Structure comes either from the
//! structure JSON file or from the line-oriented structure DSL. Both are
//! combined by [`validate_model`] into a [`MonolithModel`].

mod dsl;
mod json;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use dsl::parse_structure_dsl;
pub use json::{parse_accesses, parse_structure_json};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    R,
    W,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::R => "R",
            Mode::W => "W",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single read or write of a domain entity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Access {
    pub entity: String,
    pub mode: Mode,
}

impl Access {
    pub fn new(entity: impl Into<String>, mode: Mode) -> Self {
        Self { entity: entity.into(), mode }
    }

    pub fn read(entity: impl Into<String>) -> Self {
        Self::new(entity, Mode::R)
    }

    pub fn write(entity: impl Into<String>) -> Self {
        Self::new(entity, Mode::W)
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.entity, self.mode)
    }
}

/// A monolith use case, flattened to a single ordered access trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functionality {
    pub name: String,
    pub trace: Vec<Access>,
}

impl Functionality {
    pub fn new(name: impl Into<String>, trace: Vec<Access>) -> Self {
        Self { name: name.into(), trace }
    }

    /// Distinct entities in first-access order.
    pub fn entities(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.trace
            .iter()
            .filter(|a| seen.insert(a.entity.as_str()))
            .map(|a| a.entity.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Association,
    Inheritance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

impl Attribute {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Self { name: name.into(), ty: ty.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub field: String,
    pub target: String,
    pub kind: ReferenceKind,
}

impl Reference {
    pub fn association(field: impl Into<String>, target: impl Into<String>) -> Self {
        Self { field: field.into(), target: target.into(), kind: ReferenceKind::Association }
    }

    pub fn inheritance(field: impl Into<String>, target: impl Into<String>) -> Self {
        Self { field: field.into(), target: target.into(), kind: ReferenceKind::Inheritance }
    }
}

/// Field name given to the inheritance reference produced by `extends`.
pub const INHERITANCE_FIELD: &str = "super";

/// Structural facts about one domain entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityStructure {
    pub name: String,
    #[serde(default)]
    pub attributes: Vec<Attribute>,
    #[serde(default)]
    pub references: Vec<Reference>,
    /// Set when validation had to invent the entity because it was used
    /// but never declared.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthesized: bool,
}

impl EntityStructure {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            attributes: Vec::new(),
            references: Vec::new(),
            synthesized: false,
        }
    }

    pub fn with_attribute(mut self, name: &str, ty: &str) -> Self {
        self.attributes.push(Attribute::new(name, ty));
        self
    }

    pub fn with_reference(mut self, reference: Reference) -> Self {
        self.references.push(reference);
        self
    }

    fn synthesized(name: &str) -> Self {
        Self { synthesized: true, ..Self::new(name) }
    }
}

/// Non-fatal findings produced by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModelWarning {
    /// A trace accesses an entity that has no declared structure.
    UndeclaredEntity { entity: String },
    /// A reference targets an entity that has no declared structure.
    UnresolvedReference { entity: String, field: String, target: String },
    /// A functionality with an empty trace was dropped.
    EmptyTrace { functionality: String },
    /// A later functionality with an already-used name was dropped.
    DuplicateFunctionality { functionality: String },
}

impl fmt::Display for ModelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelWarning::UndeclaredEntity { entity } => {
                write!(f, "entity `{entity}` is accessed but not declared; synthesized with empty structure")
            }
            ModelWarning::UnresolvedReference { entity, field, target } => write!(
                f,
                "reference `{entity}.{field}` targets undeclared entity `{target}`; synthesized with empty structure"
            ),
            ModelWarning::EmptyTrace { functionality } => {
                write!(f, "functionality `{functionality}` has an empty trace; dropped")
            }
            ModelWarning::DuplicateFunctionality { functionality } => {
                write!(f, "functionality `{functionality}` is declared more than once; later copies dropped")
            }
        }
    }
}

/// Validated monolith description: entity structure plus access traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonolithModel {
    entities: BTreeMap<String, EntityStructure>,
    functionalities: Vec<Functionality>,
    warnings: Vec<ModelWarning>,
}

impl MonolithModel {
    pub fn entities(&self) -> impl Iterator<Item = &EntityStructure> {
        self.entities.values()
    }

    pub fn entity(&self, name: &str) -> Option<&EntityStructure> {
        self.entities.get(name)
    }

    pub fn contains_entity(&self, name: &str) -> bool {
        self.entities.contains_key(name)
    }

    pub fn functionalities(&self) -> &[Functionality] {
        &self.functionalities
    }

    pub fn functionality(&self, name: &str) -> Option<&Functionality> {
        self.functionalities.iter().find(|f| f.name == name)
    }

    pub fn warnings(&self) -> &[ModelWarning] {
        &self.warnings
    }

    /// Entities accessed by at least one functionality, sorted by name.
    /// These are the entities that get clustered.
    pub fn accessed_entities(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self
            .functionalities
            .iter()
            .flat_map(|f| f.trace.iter().map(|a| a.entity.as_str()))
            .collect();
        set.into_iter().collect()
    }

    /// Runs validation again over this model's own content, keeping the
    /// warnings already attached.
    pub fn revalidated(&self) -> MonolithModel {
        let mut model = validate_model(
            self.functionalities.clone(),
            self.entities.values().cloned().collect(),
        );
        let mut warnings = self.warnings.clone();
        for w in model.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        model.warnings = warnings;
        model
    }

    /// Accesses file contents for this model.
    pub fn to_accesses_json(&self) -> String {
        json::accesses_to_json(&self.functionalities)
    }

    /// Structure file contents for this model.
    pub fn to_structure_json(&self) -> String {
        json::structure_to_json(self.entities.values())
    }
}

/// Parses structure from either format, picking JSON when the first
/// significant character is `{`.
pub fn parse_structure(text: &str) -> Result<Vec<EntityStructure>> {
    let first = text
        .lines()
        .map(str::trim_start)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .and_then(|l| l.chars().next());
    if first == Some('{') {
        parse_structure_json(text)
    } else {
        parse_structure_dsl(text)
    }
}

/// Cross-checks traces against structure. Never fails: anything that does
/// not line up is repaired and reported as a warning on the model.
pub fn validate_model(
    functionalities: Vec<Functionality>,
    structures: Vec<EntityStructure>,
) -> MonolithModel {
    let mut warnings = Vec::new();
    let mut entities: BTreeMap<String, EntityStructure> = BTreeMap::new();
    for s in structures {
        // later duplicates lose; parsers already reject them
        entities.entry(s.name.clone()).or_insert(s);
    }
    // synthesized entities from an earlier pass count as undeclared, so a
    // second pass reports exactly the same warnings
    let declared: HashSet<String> = entities
        .values()
        .filter(|e| !e.synthesized)
        .map(|e| e.name.clone())
        .collect();

    let mut names = HashSet::new();
    let mut kept = Vec::with_capacity(functionalities.len());
    for f in functionalities {
        if f.trace.is_empty() {
            warnings.push(ModelWarning::EmptyTrace { functionality: f.name });
            continue;
        }
        if !names.insert(f.name.clone()) {
            warnings.push(ModelWarning::DuplicateFunctionality { functionality: f.name });
            continue;
        }
        kept.push(f);
    }

    let mut reported = HashSet::new();
    for f in &kept {
        for a in &f.trace {
            if !declared.contains(&a.entity) && reported.insert(a.entity.clone()) {
                entities
                    .entry(a.entity.clone())
                    .or_insert_with(|| EntityStructure::synthesized(&a.entity));
                warnings.push(ModelWarning::UndeclaredEntity { entity: a.entity.clone() });
            }
        }
    }

    let dangling: Vec<(String, String, String)> = entities
        .values()
        .flat_map(|e| {
            e.references
                .iter()
                .map(move |r| (e.name.clone(), r.field.clone(), r.target.clone()))
        })
        .filter(|(_, _, target)| !declared.contains(target))
        .collect();
    for (entity, field, target) in dangling {
        entities
            .entry(target.clone())
            .or_insert_with(|| EntityStructure::synthesized(&target));
        warnings.push(ModelWarning::UnresolvedReference { entity, field, target });
    }

    MonolithModel { entities, functionalities: kept, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Vec<Functionality> {
        vec![
            Functionality::new("f1", vec![Access::read("A"), Access::write("B")]),
            Functionality::new("f2", vec![Access::read("E")]),
        ]
    }

    #[test]
    fn undeclared_entity_is_synthesized_with_warning() {
        let model = validate_model(
            fixture(),
            vec![EntityStructure::new("A"), EntityStructure::new("B")],
        );
        let e = model.entity("E").unwrap();
        assert!(e.synthesized);
        assert!(e.attributes.is_empty() && e.references.is_empty());
        assert_eq!(
            model.warnings(),
            &[ModelWarning::UndeclaredEntity { entity: "E".into() }]
        );
    }

    #[test]
    fn consistent_inputs_have_no_warnings() {
        let model = validate_model(
            fixture(),
            ["A", "B", "E"].into_iter().map(EntityStructure::new).collect(),
        );
        assert!(model.warnings().is_empty());
    }

    #[test]
    fn unaccessed_declared_entity_is_kept() {
        let model = validate_model(
            fixture(),
            ["A", "B", "E", "Z"].into_iter().map(EntityStructure::new).collect(),
        );
        assert!(model.contains_entity("Z"));
        assert!(model.warnings().is_empty());
        assert_eq!(model.accessed_entities(), vec!["A", "B", "E"]);
    }

    #[test]
    fn dangling_reference_target_is_synthesized() {
        let model = validate_model(
            fixture(),
            vec![
                EntityStructure::new("A").with_reference(Reference::association("q", "Q")),
                EntityStructure::new("B"),
                EntityStructure::new("E"),
            ],
        );
        assert!(model.entity("Q").unwrap().synthesized);
        assert_eq!(model.warnings().len(), 1);
    }

    #[test]
    fn validation_is_idempotent() {
        let model = validate_model(
            vec![
                Functionality::new("f1", vec![Access::read("A")]),
                Functionality::new("f1", vec![Access::read("B")]),
                Functionality::new("f0", vec![]),
            ],
            vec![EntityStructure::new("B").with_reference(Reference::association("x", "X"))],
        );
        assert_eq!(model.warnings().len(), 4);
        let again = model.revalidated();
        assert_eq!(again, model);
        assert_eq!(again.revalidated(), model);
    }

    #[test]
    fn functionality_entities_in_first_access_order() {
        let f = Functionality::new(
            "f",
            vec![Access::read("B"), Access::read("A"), Access::write("B")],
        );
        assert_eq!(f.entities(), vec!["B", "A"]);
    }
}
