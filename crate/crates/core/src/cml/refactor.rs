use std::collections::{BTreeMap, HashMap, HashSet};

use super::{
    AggregateNode, BoundedContextNode, CmlDocument, CoordinationNode, EntityNode, OperationNode,
    RelationshipNode, StepNode,
};
use crate::dddmap::{choose_root, AccessStats, ReferenceOrigin};
use crate::error::{Error, Result};

/// Target of a generated `_Reference` entity, read from its marker comment
/// or, failing that, from its name.
fn placeholder_target(e: &EntityNode) -> Option<String> {
    if let Some((_, entity)) = e.comments.iter().find_map(|c| ReferenceOrigin::parse_marker(c)) {
        return Some(entity);
    }
    let stripped = e.name.strip_suffix("_Reference")?;
    (e.attributes.is_empty() && e.references.is_empty() && !stripped.is_empty()).then(|| stripped.to_string())
}

fn rewrite_marker(comment: &mut String, from: &[&str], to: &str) {
    if let Some((Some(ctx), entity)) = ReferenceOrigin::parse_marker(comment) {
        if from.contains(&ctx.as_str()) {
            let origin = ReferenceOrigin { context: Some(to.to_string()), entity, inherited_by: Vec::new() };
            *comment = origin.marker();
        }
    }
}

fn fresh_name(base: &str, taken: &HashSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (2..).map(|i| format!("{base}_{i}")).find(|n| !taken.contains(n)).expect("unbounded")
}

fn push_unique(into: &mut Vec<String>, items: impl IntoIterator<Item = String>) {
    for c in items {
        if !into.contains(&c) {
            into.push(c);
        }
    }
}

/// Merges bounded contexts `a` and `b` into one named `<a>_<b>`, placed
/// where `a` was.
///
/// Services, coordinations and aggregates of both are kept, renamed with a
/// numeric suffix on collision. Generated `_Reference` entities whose
/// target now lives in the merged context are dropped and references to
/// them point at the target directly; duplicates of the same placeholder
/// are kept once. Coordination steps and reference markers are
/// re-addressed, relationships between `a` and `b` disappear, and adjacent
/// steps that now hit the same context collapse into one step calling a
/// new operation named by joining the old ones with `_`. A coordination
/// left with a single step is dropped; its operation stays on the service.
pub fn merge_bounded_contexts(doc: &CmlDocument, a: &str, b: &str) -> Result<CmlDocument> {
    if a == b {
        return Err(Error::InvalidArgument(format!("cannot merge context `{a}` with itself")));
    }
    let ia = doc.contexts.iter().position(|c| c.name == a).ok_or_else(|| Error::UnknownContext(a.to_string()))?;
    let ib = doc.contexts.iter().position(|c| c.name == b).ok_or_else(|| Error::UnknownContext(b.to_string()))?;
    let merged = format!("{a}_{b}");
    if doc.context(&merged).is_some() {
        return Err(Error::InvalidArgument(format!("a context named `{merged}` already exists")));
    }
    let ca = &doc.contexts[ia];
    let cb = &doc.contexts[ib];
    let renamed = |ctx: &str| if ctx == a || ctx == b { merged.clone() } else { ctx.to_string() };

    // application: services keep their names unless they collide
    let mut service_renames: HashMap<String, String> = HashMap::new();
    let application = match (&ca.application, &cb.application) {
        (None, None) => None,
        (x, y) => {
            let mut app = x.clone().unwrap_or_default();
            let other = y.clone().unwrap_or_default();
            push_unique(&mut app.comments, other.comments);
            let mut taken: HashSet<String> = app.services.iter().map(|s| s.name.clone()).collect();
            for mut s in other.services {
                let name = fresh_name(&s.name, &taken);
                if name != s.name {
                    service_renames.insert(s.name.clone(), name.clone());
                    s.name = name.clone();
                }
                taken.insert(name);
                app.services.push(s);
            }
            let mut taken: HashSet<String> = app.coordinations.iter().map(|k| k.name.clone()).collect();
            for mut k in other.coordinations {
                k.name = fresh_name(&k.name, &taken);
                taken.insert(k.name.clone());
                app.coordinations.push(k);
            }
            app.trailing_comments.extend(other.trailing_comments);
            Some(app)
        }
    };

    // aggregates
    let mut taken: HashSet<String> = doc
        .contexts
        .iter()
        .filter(|c| c.name != a && c.name != b)
        .flat_map(|c| c.aggregates.iter().map(|g| g.name.clone()))
        .collect();
    let mut aggregates: Vec<AggregateNode> = Vec::new();
    for mut g in ca.aggregates.iter().chain(&cb.aggregates).cloned() {
        g.name = fresh_name(&g.name, &taken);
        taken.insert(g.name.clone());
        aggregates.push(g);
    }
    let real: HashSet<String> = aggregates
        .iter()
        .flat_map(|g| g.entities.iter())
        .filter(|e| placeholder_target(e).is_none())
        .map(|e| e.name.clone())
        .collect();
    let mut retarget: HashMap<String, String> = HashMap::new();
    let mut kept: HashSet<String> = HashSet::new();
    for g in &mut aggregates {
        g.entities.retain(|e| match placeholder_target(e) {
            Some(t) if real.contains(&t) => {
                retarget.insert(e.name.clone(), t);
                false
            }
            Some(_) => kept.insert(e.name.clone()),
            None => true,
        });
    }
    for e in aggregates.iter_mut().flat_map(|g| g.entities.iter_mut()) {
        for r in &mut e.references {
            if let Some(t) = retarget.get(&r.target) {
                r.target = t.clone();
            }
        }
    }

    let mut comments = ca.comments.clone();
    push_unique(&mut comments, cb.comments.iter().cloned());
    let merged_node = BoundedContextNode {
        comments,
        name: merged.clone(),
        application,
        aggregates,
        trailing_comments: ca.trailing_comments.iter().chain(&cb.trailing_comments).cloned().collect(),
    };

    let mut contexts: Vec<BoundedContextNode> = Vec::with_capacity(doc.contexts.len() - 1);
    for (i, c) in doc.contexts.iter().enumerate() {
        if i == ia {
            contexts.push(merged_node.clone());
        } else if i != ib {
            contexts.push(c.clone());
        }
    }

    for c in &mut contexts {
        for e in c.aggregates.iter_mut().flat_map(|g| g.entities.iter_mut()) {
            for comment in &mut e.comments {
                rewrite_marker(comment, &[a, b], &merged);
            }
        }
        for k in c.application.iter_mut().flat_map(|app| app.coordinations.iter_mut()) {
            for s in &mut k.steps {
                if s.context == b {
                    if let Some(n) = service_renames.get(&s.service) {
                        s.service = n.clone();
                    }
                }
                s.context = renamed(&s.context);
            }
        }
    }
    collapse_coordinations(&mut contexts, &merged);

    let mut map = doc.context_map.clone();
    map.contains = {
        let mut out = Vec::new();
        for c in &doc.context_map.contains {
            if c != b {
                push_unique(&mut out, [renamed(c)]);
            }
        }
        if !doc.context_map.contains.iter().any(|c| c == a) && doc.context_map.contains.iter().any(|c| c == b) {
            push_unique(&mut out, [merged.clone()]);
        }
        out
    };
    let mut relationships: Vec<RelationshipNode> = Vec::new();
    for r in &doc.context_map.relationships {
        let (u, d) = (renamed(&r.upstream), renamed(&r.downstream));
        if u == merged && d == merged {
            continue;
        }
        match relationships.iter_mut().find(|x| x.upstream == u && x.downstream == d) {
            Some(existing) => push_unique(&mut existing.comments, r.comments.iter().cloned()),
            None => relationships.push(RelationshipNode { comments: r.comments.clone(), upstream: u, downstream: d }),
        }
    }
    map.relationships = relationships;

    Ok(CmlDocument { context_map: map, contexts, trailing_comments: doc.trailing_comments.clone() })
}

/// Collapses adjacent steps on `context` in every coordination, adding the
/// joined operations to the first step's service, then drops coordinations
/// reduced to one step.
fn collapse_coordinations(contexts: &mut [BoundedContextNode], context: &str) {
    let mut new_ops: Vec<(String, String)> = Vec::new();
    for c in contexts.iter_mut() {
        let Some(app) = c.application.as_mut() else { continue };
        app.coordinations.retain_mut(|k: &mut CoordinationNode| {
            let before = k.steps.len();
            let mut steps: Vec<StepNode> = Vec::with_capacity(before);
            for s in k.steps.drain(..) {
                match steps.last_mut() {
                    Some(prev) if prev.context == s.context && s.context == context => {
                        prev.operation = format!("{}_{}", prev.operation, s.operation);
                        prev.comments.extend(s.comments);
                    }
                    _ => steps.push(s),
                }
            }
            for s in &steps {
                if s.context == context {
                    new_ops.push((s.service.clone(), s.operation.clone()));
                }
            }
            k.steps = steps;
            !(before > 1 && k.steps.len() == 1)
        });
    }
    if let Some(app) = contexts.iter_mut().find(|c| c.name == context).and_then(|c| c.application.as_mut()) {
        for (service, op) in new_ops {
            if let Some(s) = app.services.iter_mut().find(|s| s.name == service) {
                if !s.operations.iter().any(|o| o.name == op) {
                    s.operations.push(OperationNode { comments: Vec::new(), name: op });
                }
            }
        }
    }
}

/// Replaces the aggregates of `context` by one aggregate per part of
/// `parts`.
///
/// The parts must cover every entity of the context except generated
/// `_Reference` entities, which may be listed or left out; a left-out one
/// goes to the first part that references it. Each part's root is the
/// entity with the most external accesses according to its stats comment,
/// and the aggregate is named `<Root>Aggregate`.
pub fn split_aggregate(doc: &CmlDocument, context: &str, parts: &[Vec<String>]) -> Result<CmlDocument> {
    let ci = doc
        .contexts
        .iter()
        .position(|c| c.name == context)
        .ok_or_else(|| Error::UnknownContext(context.to_string()))?;
    let ctx = &doc.contexts[ci];
    let entities: Vec<&EntityNode> = ctx.aggregates.iter().flat_map(|g| g.entities.iter()).collect();
    let by_name: BTreeMap<&str, &EntityNode> = entities.iter().map(|e| (e.name.as_str(), *e)).collect();

    if parts.is_empty() {
        return Err(Error::InvalidPartition("no parts given".into()));
    }
    let mut part_of: HashMap<&str, usize> = HashMap::new();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::InvalidPartition(format!("part {i} is empty")));
        }
        for name in part {
            if !by_name.contains_key(name.as_str()) {
                return Err(Error::InvalidPartition(format!("`{name}` is not an entity of `{context}`")));
            }
            if part_of.insert(name, i).is_some() {
                return Err(Error::InvalidPartition(format!("`{name}` appears in more than one part")));
            }
        }
    }
    for e in &entities {
        if part_of.contains_key(e.name.as_str()) {
            continue;
        }
        if placeholder_target(e).is_none() {
            return Err(Error::InvalidPartition(format!("entity `{}` is not covered", e.name)));
        }
        let home = entities
            .iter()
            .filter(|x| x.references.iter().any(|r| r.target == e.name))
            .find_map(|x| part_of.get(x.name.as_str()).copied())
            .unwrap_or(0);
        part_of.insert(&e.name, home);
    }

    let mut taken: HashSet<String> = doc
        .contexts
        .iter()
        .filter(|c| c.name != context)
        .flat_map(|c| c.aggregates.iter().map(|g| g.name.clone()))
        .collect();
    let mut aggregates = Vec::with_capacity(parts.len());
    for i in 0..parts.len() {
        let mut members: Vec<EntityNode> =
            entities.iter().filter(|e| part_of[e.name.as_str()] == i).map(|e| (*e).clone()).collect();
        let root = choose_root(members.iter().map(|e| {
            let external = match placeholder_target(e) {
                Some(_) => None,
                None => Some(
                    e.comments.iter().find_map(|c| AccessStats::parse_comment(c)).map(|s| s.external).unwrap_or(0),
                ),
            };
            (e.name.as_str(), external)
        }))
        .map(str::to_string);
        for e in &mut members {
            e.aggregate_root = Some(&e.name) == root.as_ref();
        }
        let name = fresh_name(&format!("{}Aggregate", root.unwrap_or_default()), &taken);
        taken.insert(name.clone());
        aggregates.push(AggregateNode { comments: Vec::new(), name, entities: members, trailing_comments: Vec::new() });
    }
    if let Some(first) = aggregates.first_mut() {
        for g in &ctx.aggregates {
            first.comments.extend(g.comments.iter().cloned());
            first.trailing_comments.extend(g.trailing_comments.iter().cloned());
        }
    }

    let mut out = doc.clone();
    out.contexts[ci].aggregates = aggregates;
    Ok(out)
}
