use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use super::CmlDocument;
use crate::ident::{is_identifier, is_type_name};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    /// A coordination step names a context, service or operation that does
    /// not exist.
    UnresolvedStep,
    /// An entity references an entity outside its bounded context.
    CrossContextReference,
    /// The context map names a context that is not defined.
    UnknownContext,
    InvalidIdentifier,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Where, e.g. `Cluster0/f3[1]`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Collector(Vec<Diagnostic>);

impl Collector {
    fn push(&mut self, kind: DiagnosticKind, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic { kind, path: path.into(), message: message.into() });
    }

    fn ident(&mut self, path: &str, s: &str) {
        if !is_identifier(s) {
            self.push(DiagnosticKind::InvalidIdentifier, path, format!("`{s}` is not a valid identifier"));
        }
    }

    fn unique<'a>(&mut self, path: &str, what: &str, names: impl IntoIterator<Item = &'a str>) {
        let mut seen = HashSet::new();
        let mut reported = BTreeSet::new();
        for n in names {
            if !seen.insert(n) && reported.insert(n) {
                self.push(DiagnosticKind::Duplicate, path, format!("duplicate {what} `{n}`"));
            }
        }
    }
}

/// Semantic checks on a parsed document. An empty result means the
/// document is consistent.
pub fn validate(doc: &CmlDocument) -> Vec<Diagnostic> {
    let mut d = Collector(Vec::new());
    let map = &doc.context_map;
    d.ident("ContextMap", &map.name);
    let defined: HashSet<&str> = doc.contexts.iter().map(|c| c.name.as_str()).collect();
    d.unique("", "bounded context", doc.contexts.iter().map(|c| c.name.as_str()));
    d.unique("ContextMap", "contained context", map.contains.iter().map(String::as_str));
    for c in map.contains.iter().chain(map.relationships.iter().flat_map(|r| [&r.upstream, &r.downstream])) {
        if !defined.contains(c.as_str()) {
            d.push(DiagnosticKind::UnknownContext, "ContextMap", format!("unknown bounded context `{c}`"));
        }
    }

    // context -> service -> operations
    let mut operations: HashMap<&str, HashMap<&str, HashSet<&str>>> = HashMap::new();
    for c in &doc.contexts {
        let services = operations.entry(&c.name).or_default();
        for s in c.application.iter().flat_map(|a| a.services.iter()) {
            services.entry(&s.name).or_default().extend(s.operations.iter().map(|o| o.name.as_str()));
        }
    }

    let mut aggregates = Vec::new();
    for c in &doc.contexts {
        let cp = c.name.as_str();
        d.ident(cp, &c.name);
        if let Some(app) = &c.application {
            d.unique(cp, "service", app.services.iter().map(|s| s.name.as_str()));
            d.unique(cp, "coordination", app.coordinations.iter().map(|k| k.name.as_str()));
            for s in &app.services {
                let sp = format!("{cp}/{}", s.name);
                d.ident(&sp, &s.name);
                d.unique(&sp, "operation", s.operations.iter().map(|o| o.name.as_str()));
                for o in &s.operations {
                    d.ident(&sp, &o.name);
                }
            }
            for k in &app.coordinations {
                d.ident(cp, &k.name);
                for (i, s) in k.steps.iter().enumerate() {
                    let sp = format!("{cp}/{}[{i}]", k.name);
                    for part in [&s.context, &s.service, &s.operation] {
                        d.ident(&sp, part);
                    }
                    let target = format!("{}::{}::{}", s.context, s.service, s.operation);
                    match operations.get(s.context.as_str()) {
                        None => d.push(DiagnosticKind::UnresolvedStep, sp, format!("`{target}`: unknown context")),
                        Some(services) => match services.get(s.service.as_str()) {
                            None => d.push(DiagnosticKind::UnresolvedStep, sp, format!("`{target}`: unknown service")),
                            Some(ops) if !ops.contains(s.operation.as_str()) => {
                                d.push(DiagnosticKind::UnresolvedStep, sp, format!("`{target}`: unknown operation"))
                            }
                            Some(_) => {}
                        },
                    }
                }
            }
        }

        let local: HashSet<&str> =
            c.aggregates.iter().flat_map(|a| a.entities.iter().map(|e| e.name.as_str())).collect();
        d.unique(cp, "entity", c.aggregates.iter().flat_map(|a| a.entities.iter().map(|e| e.name.as_str())));
        for a in &c.aggregates {
            d.ident(cp, &a.name);
            aggregates.push(a.name.as_str());
            for e in &a.entities {
                let ep = format!("{cp}/{}", e.name);
                d.ident(&ep, &e.name);
                d.unique(
                    &ep,
                    "field",
                    e.attributes.iter().map(|x| x.name.as_str()).chain(e.references.iter().map(|r| r.name.as_str())),
                );
                for x in &e.attributes {
                    d.ident(&ep, &x.name);
                    if !is_type_name(&x.ty) {
                        d.push(DiagnosticKind::InvalidIdentifier, &ep, format!("`{}` is not a valid type", x.ty));
                    }
                }
                for r in &e.references {
                    d.ident(&ep, &r.name);
                    d.ident(&ep, &r.target);
                    if !local.contains(r.target.as_str()) {
                        d.push(
                            DiagnosticKind::CrossContextReference,
                            &ep,
                            format!("`{}` references `{}` outside context `{cp}`", r.name, r.target),
                        );
                    }
                }
            }
        }
    }
    d.unique("", "aggregate", aggregates);
    d.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cml::parse;

    #[test]
    fn unresolved_step_is_a_diagnostic_not_a_parse_error() {
        let doc = parse(
            "ContextMap M { contains C }\nBoundedContext C {\n    Application {\n        Service S {\n            void a();\n        }\n        Coordination k {\n            C::S::a;\n            C::S::b;\n            D::S::a;\n        }\n    }\n}\n",
        )
        .unwrap();
        let ds = validate(&doc);
        assert_eq!(ds.len(), 2, "{ds:?}");
        assert!(ds.iter().all(|d| d.kind == DiagnosticKind::UnresolvedStep));
        assert_eq!(ds[0].path, "C/k[1]");
    }

    #[test]
    fn cross_context_reference_is_reported() {
        let doc = parse(
            "ContextMap M { }\nBoundedContext C {\n    Aggregate A {\n        Entity X {\n            - Y y\n        }\n    }\n}\nBoundedContext D {\n    Aggregate B {\n        Entity Y { }\n    }\n}\n",
        )
        .unwrap();
        let ds = validate(&doc);
        assert_eq!(ds.iter().map(|d| d.kind).collect::<Vec<_>>(), vec![DiagnosticKind::CrossContextReference]);
    }

    #[test]
    fn duplicates_and_unknown_contexts() {
        let doc = parse(
            "ContextMap M {\n    contains C, C, Z\n    C [U]-[D] Z\n}\nBoundedContext C {\n    Aggregate A {\n        Entity X {\n            String a\n            - X a\n        }\n    }\n}\n",
        )
        .unwrap();
        let kinds: Vec<_> = validate(&doc).iter().map(|d| d.kind).collect();
        assert_eq!(
            kinds,
            vec![
                DiagnosticKind::Duplicate,
                DiagnosticKind::UnknownContext,
                DiagnosticKind::UnknownContext,
                DiagnosticKind::Duplicate
            ]
        );
    }
}
