//! The CML subset: a concrete-syntax tree, its emitter and parser,
//! post-parse validation, and two refactorings.
//!
//! ```text
//! document     := map bc*
//! map          := 'ContextMap' ID '{' ('contains' ID (',' ID)*)? rel* '}'
//! rel          := ID '[U]-[D]' ID
//! bc           := 'BoundedContext' ID '{' app? agg* '}'
//! app          := 'Application' '{' service* coordination* '}'
//! service      := 'Service' ID '{' op* '}'
//! op           := 'void' ID '(' ')' ';'
//! coordination := 'Coordination' ID '{' (ID '::' ID '::' ID ';')* '}'
//! agg          := 'Aggregate' ID '{' entity* '}'
//! entity       := 'Entity' ID '{' 'aggregateRoot'? attr* ref* '}'
//! attr         := TYPE ID
//! ref          := '-' ID ID
//! TYPE         := ID ('<' TYPE (',' TYPE)* '>')?
//! ```
//!
//! `//` line comments are kept: each attaches to the node that follows it,
//! or to the enclosing block when nothing follows before `}`.

mod emit;
mod parse;
mod refactor;
mod validate;

pub use emit::{emit, emit_model};
pub use parse::parse;
pub use refactor::{merge_bounded_contexts, split_aggregate};
pub use validate::{validate, Diagnostic, DiagnosticKind};

use crate::dddmap::{BoundedContextModel, DddModel};
use crate::ingest::ReferenceKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmlDocument {
    pub context_map: ContextMapNode,
    pub contexts: Vec<BoundedContextNode>,
    /// Comments after the last block.
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContextMapNode {
    pub comments: Vec<String>,
    pub name: String,
    pub contains: Vec<String>,
    pub relationships: Vec<RelationshipNode>,
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelationshipNode {
    pub comments: Vec<String>,
    pub upstream: String,
    pub downstream: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundedContextNode {
    pub comments: Vec<String>,
    pub name: String,
    pub application: Option<ApplicationNode>,
    pub aggregates: Vec<AggregateNode>,
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ApplicationNode {
    pub comments: Vec<String>,
    pub services: Vec<ServiceNode>,
    pub coordinations: Vec<CoordinationNode>,
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ServiceNode {
    pub comments: Vec<String>,
    pub name: String,
    pub operations: Vec<OperationNode>,
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OperationNode {
    pub comments: Vec<String>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoordinationNode {
    pub comments: Vec<String>,
    pub name: String,
    pub steps: Vec<StepNode>,
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepNode {
    pub comments: Vec<String>,
    pub context: String,
    pub service: String,
    pub operation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AggregateNode {
    pub comments: Vec<String>,
    pub name: String,
    pub entities: Vec<EntityNode>,
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntityNode {
    pub comments: Vec<String>,
    pub name: String,
    pub aggregate_root: bool,
    pub attributes: Vec<AttributeNode>,
    pub references: Vec<ReferenceNode>,
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttributeNode {
    pub comments: Vec<String>,
    pub ty: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReferenceNode {
    pub comments: Vec<String>,
    pub target: String,
    pub name: String,
}

/// Comment put on references that stand for inheritance.
pub fn extends_comment(target: &str) -> String {
    format!("extends {target}")
}

impl CmlDocument {
    pub fn context(&self, name: &str) -> Option<&BoundedContextNode> {
        self.contexts.iter().find(|c| c.name == name)
    }

    pub fn coordinations(&self) -> impl Iterator<Item = (&BoundedContextNode, &CoordinationNode)> {
        self.contexts
            .iter()
            .flat_map(|c| c.application.iter().flat_map(move |a| a.coordinations.iter().map(move |k| (c, k))))
    }

    pub fn coordination(&self, name: &str) -> Option<&CoordinationNode> {
        self.coordinations().map(|(_, k)| k).find(|k| k.name == name)
    }

    /// Builds the document [`emit_model`] prints for `model`.
    pub fn from_model(model: &DddModel) -> CmlDocument {
        let context_map = ContextMapNode {
            comments: Vec::new(),
            name: model.map_name.clone(),
            contains: model.contexts.iter().map(|c| c.name.clone()).collect(),
            relationships: model
                .relationships
                .iter()
                .map(|r| RelationshipNode {
                    comments: r.causes.iter().map(|(from, to)| format!("{from} references {to}")).collect(),
                    upstream: r.upstream.clone(),
                    downstream: r.downstream.clone(),
                })
                .collect(),
            trailing_comments: Vec::new(),
        };
        CmlDocument {
            context_map,
            contexts: model.contexts.iter().map(context_node).collect(),
            trailing_comments: Vec::new(),
        }
    }
}

fn context_node(c: &BoundedContextModel) -> BoundedContextNode {
    let service = ServiceNode {
        comments: Vec::new(),
        name: c.service.name.clone(),
        operations: c
            .service
            .operations
            .iter()
            .map(|o| OperationNode { comments: Vec::new(), name: o.name.clone() })
            .collect(),
        trailing_comments: Vec::new(),
    };
    let coordinations = c
        .coordinations
        .iter()
        .map(|k| CoordinationNode {
            comments: if k.name == k.functionality { Vec::new() } else { vec![format!("functionality {}", k.functionality)] },
            name: k.name.clone(),
            steps: k
                .steps
                .iter()
                .map(|s| StepNode {
                    comments: Vec::new(),
                    context: s.context.clone(),
                    service: s.service.clone(),
                    operation: s.operation.clone(),
                })
                .collect(),
            trailing_comments: Vec::new(),
        })
        .collect();
    let entities = c
        .aggregate
        .entities
        .iter()
        .map(|e| {
            let mut comments = Vec::new();
            if let Some(origin) = &e.reference_to {
                comments.push(origin.marker());
            }
            if let Some(stats) = &e.stats {
                comments.push(stats.to_comment());
            }
            EntityNode {
                comments,
                name: e.name.clone(),
                aggregate_root: e.is_aggregate_root,
                attributes: e
                    .attributes
                    .iter()
                    .map(|a| AttributeNode { comments: Vec::new(), ty: a.ty.clone(), name: a.name.clone() })
                    .collect(),
                references: e
                    .references
                    .iter()
                    .map(|r| ReferenceNode {
                        comments: match r.kind {
                            ReferenceKind::Inheritance => {
                                let original = r.target.strip_suffix("_Reference").unwrap_or(&r.target);
                                vec![extends_comment(original)]
                            }
                            ReferenceKind::Association => Vec::new(),
                        },
                        target: r.target.clone(),
                        name: r.field.clone(),
                    })
                    .collect(),
                trailing_comments: Vec::new(),
            }
        })
        .collect();
    BoundedContextNode {
        comments: Vec::new(),
        name: c.name.clone(),
        application: Some(ApplicationNode {
            comments: Vec::new(),
            services: vec![service],
            coordinations,
            trailing_comments: Vec::new(),
        }),
        aggregates: vec![AggregateNode {
            comments: Vec::new(),
            name: c.aggregate.name.clone(),
            entities,
            trailing_comments: Vec::new(),
        }],
        trailing_comments: Vec::new(),
    }
}
