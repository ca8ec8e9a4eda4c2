use std::collections::{BTreeMap, BTreeSet};

use super::{reference_entity_name, ContextRelationship, DddEntity, DddModel, ReferenceOrigin};
use crate::ingest::ReferenceKind;

/// Replaces every reference that leaves its bounded context with a
/// reference to a local `<Target>_Reference` entity, one per context and
/// target, and records an upstream/downstream relationship from the
/// target's context to the referencing one. Targets that belong to no
/// context get a placeholder but no relationship. Running it twice changes
/// nothing.
pub fn resolve_references(mut model: DddModel) -> DddModel {
    let owners: BTreeMap<String, String> =
        model.owners().into_iter().map(|(e, c)| (e.to_string(), c.to_string())).collect();
    let position: BTreeMap<String, usize> =
        model.contexts.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();

    // (upstream, downstream) -> causes
    let mut links: BTreeMap<(usize, usize), BTreeSet<(String, String)>> = BTreeMap::new();
    for r in &model.relationships {
        if let (Some(&u), Some(&d)) = (position.get(&r.upstream), position.get(&r.downstream)) {
            links.entry((u, d)).or_default().extend(r.causes.iter().cloned());
        }
    }

    for (ci, context) in model.contexts.iter_mut().enumerate() {
        let entities = &mut context.aggregate.entities;
        let mut placeholders: Vec<DddEntity> = Vec::new();
        let local: BTreeSet<String> = entities.iter().map(|e| e.name.clone()).collect();
        for entity in entities.iter_mut() {
            if entity.is_reference() {
                continue;
            }
            for r in &mut entity.references {
                if local.contains(&r.target) {
                    continue;
                }
                let target = r.target.clone();
                let placeholder = reference_entity_name(&target);
                let owner = owners.get(&target).cloned();
                let slot = match placeholders.iter().position(|p| p.name == placeholder) {
                    Some(i) => i,
                    None => {
                        placeholders.push(DddEntity {
                            name: placeholder.clone(),
                            is_aggregate_root: false,
                            attributes: Vec::new(),
                            references: Vec::new(),
                            reference_to: Some(ReferenceOrigin {
                                context: owner.clone(),
                                entity: target.clone(),
                                inherited_by: Vec::new(),
                            }),
                            stats: None,
                        });
                        placeholders.len() - 1
                    }
                };
                if r.kind == ReferenceKind::Inheritance {
                    let origin = placeholders[slot].reference_to.as_mut().expect("placeholder origin");
                    if !origin.inherited_by.contains(&entity.name) {
                        origin.inherited_by.push(entity.name.clone());
                    }
                }
                r.target = placeholder;
                if let Some(u) = owner.as_ref().and_then(|o| position.get(o)) {
                    links.entry((*u, ci)).or_default().insert((entity.name.clone(), target));
                }
            }
        }
        entities.extend(placeholders);
    }

    let names: Vec<String> = model.contexts.iter().map(|c| c.name.clone()).collect();
    model.relationships = links
        .into_iter()
        .map(|((u, d), causes)| ContextRelationship {
            upstream: names[u].clone(),
            downstream: names[d].clone(),
            causes: causes.into_iter().collect(),
        })
        .collect();
    model
}

#[cfg(test)]
mod tests {
    use super::super::tests::fixture_a;
    use super::super::{map_decomposition, NamingHeuristic};
    use super::*;

    #[test]
    fn fixture_a_gets_one_reference_and_one_relationship() {
        let (m, d, sagas) = fixture_a();
        let raw = map_decomposition(&m, &d, &sagas, NamingHeuristic::FullTrace).unwrap();
        assert_eq!(raw.cross_context_references().len(), 1);
        let ddd = resolve_references(raw);
        assert!(ddd.cross_context_references().is_empty());
        let c0 = &ddd.contexts[0];
        let placeholder = c0.entity("C_Reference").unwrap();
        assert_eq!(placeholder.reference_to.as_ref().unwrap().context.as_deref(), Some("Cluster1"));
        assert_eq!(c0.entity("B").unwrap().references[0].target, "C_Reference");
        // A -> B stays local
        assert_eq!(c0.entity("A").unwrap().references[0].target, "B");
        assert_eq!(ddd.relationships.len(), 1);
        let r = &ddd.relationships[0];
        assert_eq!((r.upstream.as_str(), r.downstream.as_str()), ("Cluster1", "Cluster0"));
        assert_eq!(r.causes, vec![("B".to_string(), "C".to_string())]);
    }

    #[test]
    fn idempotent() {
        let (m, d, sagas) = fixture_a();
        let once = resolve_references(map_decomposition(&m, &d, &sagas, NamingHeuristic::FullTrace).unwrap());
        assert_eq!(resolve_references(once.clone()), once);
    }
}
