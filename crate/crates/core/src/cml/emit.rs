use std::fmt::Write as _;

use super::{AggregateNode, ApplicationNode, BoundedContextNode, CmlDocument, ContextMapNode, EntityNode};
use crate::dddmap::DddModel;
use crate::error::{Error, Result};
use crate::ident::{is_identifier, is_type_name};

const INDENT: &str = "    ";

struct Printer {
    out: String,
}

impl Printer {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn comments(&mut self, depth: usize, comments: &[String]) -> Result<()> {
        for c in comments {
            if c.contains(['\n', '\r']) {
                return Err(Error::InvalidArgument(format!("comment spans several lines: {c:?}")));
            }
            if c.is_empty() {
                self.line(depth, "//");
            } else {
                self.line(depth, &format!("// {c}"));
            }
        }
        Ok(())
    }

    /// Opens a block, or prints `header { }` when it has nothing inside.
    fn open(&mut self, depth: usize, header: &str, empty: bool) -> bool {
        if empty {
            self.line(depth, &format!("{header} {{ }}"));
            false
        } else {
            self.line(depth, &format!("{header} {{"));
            true
        }
    }

    fn close(&mut self, depth: usize, trailing: &[String]) -> Result<()> {
        self.comments(depth + 1, trailing)?;
        self.line(depth, "}");
        Ok(())
    }
}

fn ident(s: &str) -> Result<&str> {
    if is_identifier(s) {
        Ok(s)
    } else {
        Err(Error::InvalidIdentifier(s.to_string()))
    }
}

/// Prints `doc` in the canonical layout: four-space indentation, one blank
/// line between top-level blocks, LF line endings.
pub fn emit(doc: &CmlDocument) -> Result<String> {
    let mut p = Printer { out: String::new() };
    context_map(&mut p, &doc.context_map)?;
    for c in &doc.contexts {
        p.out.push('\n');
        context(&mut p, c)?;
    }
    if !doc.trailing_comments.is_empty() {
        p.out.push('\n');
        p.comments(0, &doc.trailing_comments)?;
    }
    Ok(p.out)
}

/// `emit(&CmlDocument::from_model(model))`.
pub fn emit_model(model: &DddModel) -> Result<String> {
    emit(&CmlDocument::from_model(model))
}

fn context_map(p: &mut Printer, m: &ContextMapNode) -> Result<()> {
    p.comments(0, &m.comments)?;
    let empty = m.contains.is_empty() && m.relationships.is_empty() && m.trailing_comments.is_empty();
    if p.open(0, &format!("ContextMap {}", ident(&m.name)?), empty) {
        if !m.contains.is_empty() {
            let names = m.contains.iter().map(|c| ident(c)).collect::<Result<Vec<_>>>()?;
            p.line(1, &format!("contains {}", names.join(", ")));
        }
        for r in &m.relationships {
            p.comments(1, &r.comments)?;
            p.line(1, &format!("{} [U]-[D] {}", ident(&r.upstream)?, ident(&r.downstream)?));
        }
        p.close(0, &m.trailing_comments)?;
    }
    Ok(())
}

fn context(p: &mut Printer, c: &BoundedContextNode) -> Result<()> {
    p.comments(0, &c.comments)?;
    let empty = c.application.is_none() && c.aggregates.is_empty() && c.trailing_comments.is_empty();
    if p.open(0, &format!("BoundedContext {}", ident(&c.name)?), empty) {
        if let Some(app) = &c.application {
            application(p, app)?;
        }
        for a in &c.aggregates {
            aggregate(p, a)?;
        }
        p.close(0, &c.trailing_comments)?;
    }
    Ok(())
}

fn application(p: &mut Printer, a: &ApplicationNode) -> Result<()> {
    p.comments(1, &a.comments)?;
    let empty = a.services.is_empty() && a.coordinations.is_empty() && a.trailing_comments.is_empty();
    if p.open(1, "Application", empty) {
        for s in &a.services {
            p.comments(2, &s.comments)?;
            let empty = s.operations.is_empty() && s.trailing_comments.is_empty();
            if p.open(2, &format!("Service {}", ident(&s.name)?), empty) {
                for op in &s.operations {
                    p.comments(3, &op.comments)?;
                    p.line(3, &format!("void {}();", ident(&op.name)?));
                }
                p.close(2, &s.trailing_comments)?;
            }
        }
        for k in &a.coordinations {
            p.comments(2, &k.comments)?;
            let empty = k.steps.is_empty() && k.trailing_comments.is_empty();
            if p.open(2, &format!("Coordination {}", ident(&k.name)?), empty) {
                for s in &k.steps {
                    p.comments(3, &s.comments)?;
                    p.line(3, &format!("{}::{}::{};", ident(&s.context)?, ident(&s.service)?, ident(&s.operation)?));
                }
                p.close(2, &k.trailing_comments)?;
            }
        }
        p.close(1, &a.trailing_comments)?;
    }
    Ok(())
}

fn aggregate(p: &mut Printer, a: &AggregateNode) -> Result<()> {
    p.comments(1, &a.comments)?;
    let empty = a.entities.is_empty() && a.trailing_comments.is_empty();
    if p.open(1, &format!("Aggregate {}", ident(&a.name)?), empty) {
        for e in &a.entities {
            entity(p, e)?;
        }
        p.close(1, &a.trailing_comments)?;
    }
    Ok(())
}

fn entity(p: &mut Printer, e: &EntityNode) -> Result<()> {
    p.comments(2, &e.comments)?;
    let empty =
        !e.aggregate_root && e.attributes.is_empty() && e.references.is_empty() && e.trailing_comments.is_empty();
    if p.open(2, &format!("Entity {}", ident(&e.name)?), empty) {
        if e.aggregate_root {
            p.line(3, "aggregateRoot");
        }
        for a in &e.attributes {
            if !is_type_name(&a.ty) {
                return Err(Error::InvalidIdentifier(a.ty.clone()));
            }
            p.comments(3, &a.comments)?;
            let mut line = String::new();
            let _ = write!(line, "{} {}", a.ty, ident(&a.name)?);
            p.line(3, &line);
        }
        for r in &e.references {
            p.comments(3, &r.comments)?;
            p.line(3, &format!("- {} {}", ident(&r.target)?, ident(&r.name)?));
        }
        p.close(2, &e.trailing_comments)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cml::{OperationNode, ServiceNode, StepNode, CoordinationNode};

    #[test]
    fn empty_model() {
        let m = DddModel { map_name: "Decomposition".into(), contexts: vec![], relationships: vec![] };
        assert_eq!(emit_model(&m).unwrap(), "ContextMap Decomposition { }\n");
    }

    #[test]
    fn step_syntax() {
        let doc = CmlDocument {
            context_map: ContextMapNode { name: "M".into(), contains: vec!["Cluster1".into()], ..Default::default() },
            contexts: vec![BoundedContextNode {
                name: "Cluster1".into(),
                application: Some(ApplicationNode {
                    services: vec![ServiceNode {
                        name: "Cluster1Service".into(),
                        operations: vec![OperationNode { comments: vec![], name: "rTournament".into() }],
                        ..Default::default()
                    }],
                    coordinations: vec![CoordinationNode {
                        name: "concludeQuiz".into(),
                        steps: vec![StepNode {
                            comments: vec![],
                            context: "Cluster1".into(),
                            service: "Cluster1Service".into(),
                            operation: "rTournament".into(),
                        }],
                        ..Default::default()
                    }],
                    ..Default::default()
                }),
                ..Default::default()
            }],
            trailing_comments: vec![],
        };
        let text = emit(&doc).unwrap();
        assert!(text.contains("\n            Cluster1::Cluster1Service::rTournament;\n"), "{text}");
        assert!(text.contains("void rTournament();"));
    }

    #[test]
    fn rejects_bad_identifiers() {
        let m = DddModel { map_name: "has space".into(), contexts: vec![], relationships: vec![] };
        assert!(matches!(emit_model(&m), Err(Error::InvalidIdentifier(_))));
    }
}
