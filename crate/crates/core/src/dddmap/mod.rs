//! Maps a decomposition and its sagas onto a Domain-Driven Design model.
//!
//! Every cluster becomes a bounded context holding one aggregate with the
//! cluster's entities and one application service. Local functionalities
//! become plain service operations; distributed ones become coordinations
//! owned by the saga orchestrator's context, whose steps call operations on
//! the services of the contexts they touch.

mod naming;
mod references;

use std::collections::{BTreeMap, HashMap, HashSet};

pub use naming::{name_operation, NamingHeuristic};
pub use references::resolve_references;

use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::ident::sanitize_identifier;
use crate::ingest::{Access, Attribute, MonolithModel, ReferenceKind};
use crate::saga::{check_sagas, Saga};

/// Name of the context map produced by [`map_decomposition`].
pub const MAP_NAME: &str = "Decomposition";

const STATS_PREFIX: &str = "accesses: ";
const MARKER_PREFIX: &str = "generated reference to ";

/// Share of a context's external and local accesses that hit one entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AccessStats {
    /// Accesses to the entity inside distributed functionalities.
    pub external: usize,
    /// All external accesses to the entity's context.
    pub external_total: usize,
    /// Accesses to the entity inside local functionalities.
    pub local: usize,
    /// All local accesses to the entity's context.
    pub local_total: usize,
}

fn share(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        part as f64 / total as f64
    }
}

impl AccessStats {
    pub fn external_share(&self) -> f64 {
        share(self.external, self.external_total)
    }

    pub fn local_share(&self) -> f64 {
        share(self.local, self.local_total)
    }

    /// Text of the per-entity stats comment.
    pub fn to_comment(&self) -> String {
        format!(
            "{STATS_PREFIX}external {}/{} ({:.2}%), local {}/{} ({:.2}%)",
            self.external,
            self.external_total,
            self.external_share() * 100.0,
            self.local,
            self.local_total,
            self.local_share() * 100.0
        )
    }

    /// Inverse of [`AccessStats::to_comment`].
    pub fn parse_comment(text: &str) -> Option<AccessStats> {
        let rest = text.strip_prefix(STATS_PREFIX)?;
        let (ext, loc) = rest.split_once(", ")?;
        let counts = |s: &str, label: &str| -> Option<(usize, usize)> {
            let s = s.strip_prefix(label)?.strip_prefix(' ')?;
            let (frac, _) = s.split_once(' ')?;
            let (a, b) = frac.split_once('/')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        };
        let (external, external_total) = counts(ext, "external")?;
        let (local, local_total) = counts(loc, "local")?;
        Some(AccessStats { external, external_total, local, local_total })
    }
}

/// Where a generated `<Name>_Reference` entity points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceOrigin {
    /// Owning context, `None` when the target is not in any cluster.
    pub context: Option<String>,
    pub entity: String,
    /// Local entities whose inheritance of the target was flattened.
    pub inherited_by: Vec<String>,
}

impl ReferenceOrigin {
    /// Text of the marker comment on the generated entity.
    pub fn marker(&self) -> String {
        match &self.context {
            Some(ctx) => format!("{MARKER_PREFIX}{ctx}.{}", self.entity),
            None => format!("{MARKER_PREFIX}{} (not assigned to any context)", self.entity),
        }
    }

    /// `(context, entity)` named by a marker comment.
    pub fn parse_marker(text: &str) -> Option<(Option<String>, String)> {
        let rest = text.strip_prefix(MARKER_PREFIX)?;
        let target = rest.split(' ').next()?;
        match target.rsplit_once('.') {
            Some((ctx, entity)) => Some((Some(ctx.to_string()), entity.to_string())),
            None => Some((None, target.to_string())),
        }
    }
}

/// Name of the generated placeholder standing in for `entity`.
pub fn reference_entity_name(entity: &str) -> String {
    format!("{entity}_Reference")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRef {
    pub field: String,
    pub target: String,
    pub kind: ReferenceKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DddEntity {
    pub name: String,
    pub is_aggregate_root: bool,
    pub attributes: Vec<Attribute>,
    pub references: Vec<EntityRef>,
    /// Set on generated reference entities.
    pub reference_to: Option<ReferenceOrigin>,
    /// `None` on generated reference entities.
    pub stats: Option<AccessStats>,
}

impl DddEntity {
    pub fn is_reference(&self) -> bool {
        self.reference_to.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateModel {
    pub name: String,
    pub entities: Vec<DddEntity>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationDef {
    pub name: String,
    /// Accesses of the first step that produced this operation.
    pub access_signature: Vec<Access>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceModel {
    pub name: String,
    pub operations: Vec<OperationDef>,
}

impl ServiceModel {
    fn add(&mut self, name: String, signature: &[Access]) {
        if !self.operations.iter().any(|o| o.name == name) {
            self.operations.push(OperationDef { name, access_signature: signature.to_vec() });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinationStep {
    pub context: String,
    pub service: String,
    pub operation: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coordination {
    /// Identifier derived from the functionality name.
    pub name: String,
    pub functionality: String,
    pub steps: Vec<CoordinationStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedContextModel {
    pub name: String,
    pub aggregate: AggregateModel,
    pub service: ServiceModel,
    pub coordinations: Vec<Coordination>,
}

impl BoundedContextModel {
    pub fn entity(&self, name: &str) -> Option<&DddEntity> {
        self.aggregate.entities.iter().find(|e| e.name == name)
    }
}

/// `upstream` owns entities that `downstream` references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextRelationship {
    pub upstream: String,
    pub downstream: String,
    /// `(referencing entity, referenced entity)`, sorted.
    pub causes: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DddModel {
    pub map_name: String,
    pub contexts: Vec<BoundedContextModel>,
    pub relationships: Vec<ContextRelationship>,
}

/// A reference from an entity to one outside its context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossReference {
    pub context: String,
    pub entity: String,
    pub field: String,
    pub target: String,
}

impl DddModel {
    pub fn context(&self, name: &str) -> Option<&BoundedContextModel> {
        self.contexts.iter().find(|c| c.name == name)
    }

    /// Entity name -> owning context, ignoring generated reference entities.
    pub fn owners(&self) -> HashMap<&str, &str> {
        self.contexts
            .iter()
            .flat_map(|c| {
                c.aggregate
                    .entities
                    .iter()
                    .filter(|e| !e.is_reference())
                    .map(move |e| (e.name.as_str(), c.name.as_str()))
            })
            .collect()
    }

    /// Every entity reference whose target is not an entity of the same
    /// context.
    pub fn cross_context_references(&self) -> Vec<CrossReference> {
        let mut out = Vec::new();
        for c in &self.contexts {
            let local: HashSet<&str> = c.aggregate.entities.iter().map(|e| e.name.as_str()).collect();
            for e in &c.aggregate.entities {
                for r in &e.references {
                    if !local.contains(r.target.as_str()) {
                        out.push(CrossReference {
                            context: c.name.clone(),
                            entity: e.name.clone(),
                            field: r.field.clone(),
                            target: r.target.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn operation_count(&self) -> usize {
        self.contexts.iter().map(|c| c.service.operations.len()).sum()
    }

    pub fn coordinations(&self) -> impl Iterator<Item = &Coordination> {
        self.contexts.iter().flat_map(|c| c.coordinations.iter())
    }

    pub fn reference_entity_count(&self) -> usize {
        self.contexts
            .iter()
            .flat_map(|c| c.aggregate.entities.iter())
            .filter(|e| e.is_reference())
            .count()
    }
}

/// Unique identifiers for functionality names, in model order.
fn functionality_identifiers(model: &MonolithModel) -> HashMap<String, String> {
    let mut used = HashSet::new();
    let mut out = HashMap::new();
    for f in model.functionalities() {
        let base = sanitize_identifier(&f.name);
        let mut candidate = base.clone();
        let mut n = 2;
        while !used.insert(candidate.clone()) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        out.insert(f.name.clone(), candidate);
    }
    out
}

fn sagas_by_functionality<'a>(model: &MonolithModel, sagas: &'a [Saga]) -> Result<HashMap<&'a str, &'a Saga>> {
    let by_name: HashMap<&str, &Saga> = sagas.iter().map(|s| (s.functionality.as_str(), s)).collect();
    if let Some(s) = sagas.iter().find(|s| model.functionality(&s.functionality).is_none()) {
        return Err(Error::UnknownFunctionality(s.functionality.clone()));
    }
    if let Some(f) = model.functionalities().iter().find(|f| !by_name.contains_key(f.name.as_str())) {
        return Err(Error::InvalidArgument(format!("no saga for functionality `{}`", f.name)));
    }
    Ok(by_name)
}

/// Per-entity external/local access counts and per-context totals.
fn access_counts(decomposition: &Decomposition, sagas: &[Saga]) -> (HashMap<String, (usize, usize)>, HashMap<String, (usize, usize)>) {
    let owner = decomposition.entity_map();
    let mut per_entity: HashMap<String, (usize, usize)> = HashMap::new();
    let mut per_context: HashMap<String, (usize, usize)> = HashMap::new();
    for s in sagas {
        let distributed = s.is_distributed();
        for a in s.flattened() {
            let Some(ctx) = owner.get(&a.entity) else { continue };
            let e = per_entity.entry(a.entity.clone()).or_default();
            let c = per_context.entry(ctx.clone()).or_default();
            if distributed {
                e.0 += 1;
                c.0 += 1;
            } else {
                e.1 += 1;
                c.1 += 1;
            }
        }
    }
    (per_entity, per_context)
}

/// External/local access statistics of `entity` within `context`.
pub fn access_stats(decomposition: &Decomposition, sagas: &[Saga], context: &str, entity: &str) -> Result<AccessStats> {
    let cluster = decomposition
        .cluster(context)
        .ok_or_else(|| Error::UnknownContext(context.to_string()))?;
    if !cluster.entities.contains(entity) {
        return Err(Error::InvalidArgument(format!("entity `{entity}` is not in context `{context}`")));
    }
    let (per_entity, per_context) = access_counts(decomposition, sagas);
    let (external, local) = per_entity.get(entity).copied().unwrap_or_default();
    let (external_total, local_total) = per_context.get(context).copied().unwrap_or_default();
    Ok(AccessStats { external, external_total, local, local_total })
}

/// Index of the aggregate root among `entities`: the non-reference entity
/// with the most external accesses, ties going to the smallest name. Falls
/// back to the smallest name when every entity is a reference.
pub fn choose_root<'a>(entities: impl IntoIterator<Item = (&'a str, Option<usize>)>) -> Option<&'a str> {
    let all: Vec<(&str, Option<usize>)> = entities.into_iter().collect();
    let best = all
        .iter()
        .filter_map(|&(name, ext)| ext.map(|x| (name, x)))
        .min_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)))
        .map(|(name, _)| name);
    best.or_else(|| all.iter().map(|(n, _)| *n).min())
}

/// Builds the DDD model. Entity references are copied from the structure
/// as declared; [`resolve_references`] then replaces cross-context ones.
pub fn map_decomposition(
    model: &MonolithModel,
    decomposition: &Decomposition,
    sagas: &[Saga],
    naming: NamingHeuristic,
) -> Result<DddModel> {
    decomposition.check_against(model)?;
    check_sagas(sagas, decomposition)?;
    let by_functionality = sagas_by_functionality(model, sagas)?;
    let idents = functionality_identifiers(model);
    let (per_entity, per_context) = access_counts(decomposition, sagas);

    let mut contexts: Vec<BoundedContextModel> = decomposition
        .clusters()
        .iter()
        .map(|cluster| {
            let (external_total, local_total) = per_context.get(&cluster.name).copied().unwrap_or_default();
            let mut entities: Vec<DddEntity> = cluster
                .entities
                .iter()
                .map(|name| {
                    let structure = model.entity(name);
                    let (external, local) = per_entity.get(name).copied().unwrap_or_default();
                    DddEntity {
                        name: name.clone(),
                        is_aggregate_root: false,
                        attributes: structure.map(|s| s.attributes.clone()).unwrap_or_default(),
                        references: structure
                            .map(|s| {
                                s.references
                                    .iter()
                                    .map(|r| EntityRef { field: r.field.clone(), target: r.target.clone(), kind: r.kind })
                                    .collect()
                            })
                            .unwrap_or_default(),
                        reference_to: None,
                        stats: Some(AccessStats { external, external_total, local, local_total }),
                    }
                })
                .collect();
            let root = choose_root(entities.iter().map(|e| (e.name.as_str(), e.stats.map(|s| s.external))))
                .map(str::to_string);
            for e in &mut entities {
                e.is_aggregate_root = Some(&e.name) == root.as_ref();
            }
            BoundedContextModel {
                name: cluster.name.clone(),
                aggregate: AggregateModel { name: format!("{}Aggregate", cluster.name), entities },
                service: ServiceModel { name: format!("{}Service", cluster.name), operations: Vec::new() },
                coordinations: Vec::new(),
            }
        })
        .collect();
    let index: BTreeMap<String, usize> = contexts.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();

    for f in model.functionalities() {
        let saga = by_functionality[f.name.as_str()];
        let ident = &idents[&f.name];
        let mut steps = Vec::with_capacity(saga.steps.len());
        for (i, step) in saga.steps.iter().enumerate() {
            let ctx = &mut contexts[index[&step.cluster]];
            let op = name_operation(ident, i, &step.accesses, naming);
            ctx.service.add(op.clone(), &step.accesses);
            steps.push(CoordinationStep { context: ctx.name.clone(), service: ctx.service.name.clone(), operation: op });
        }
        if saga.is_distributed() {
            contexts[index[&saga.orchestrator]].coordinations.push(Coordination {
                name: ident.clone(),
                functionality: f.name.clone(),
                steps,
            });
        }
    }

    Ok(DddModel { map_name: MAP_NAME.to_string(), contexts, relationships: Vec::new() })
}

/// [`map_decomposition`] followed by [`resolve_references`].
pub fn generate(
    model: &MonolithModel,
    decomposition: &Decomposition,
    sagas: &[Saga],
    naming: NamingHeuristic,
) -> Result<DddModel> {
    Ok(resolve_references(map_decomposition(model, decomposition, sagas, naming)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{Cluster, DecompositionParams, SimilarityWeights};
    use crate::ingest::{validate_model, Access as A, EntityStructure, Functionality, Reference};
    use crate::saga::{refactor_all, OrchestratorPolicy};

    pub(crate) fn fixture_a() -> (MonolithModel, Decomposition, Vec<Saga>) {
        let model = validate_model(
            vec![
                Functionality::new("f1", vec![A::read("A"), A::write("B"), A::write("A")]),
                Functionality::new("f2", vec![A::read("C"), A::read("D"), A::write("C")]),
                Functionality::new("f3", vec![A::read("A"), A::write("C")]),
                Functionality::new("f4", vec![A::read("C"), A::write("A"), A::read("B")]),
            ],
            vec![
                EntityStructure::new("A").with_attribute("name", "String").with_reference(Reference::association("b", "B")),
                EntityStructure::new("B").with_reference(Reference::association("c", "C")),
                EntityStructure::new("C"),
                EntityStructure::new("D").with_reference(Reference::inheritance("super", "C")),
            ],
        );
        let c = |name: &str, es: &[&str]| Cluster { name: name.into(), entities: es.iter().map(|s| s.to_string()).collect() };
        let d = Decomposition::new(
            vec![c("Cluster0", &["A", "B"]), c("Cluster1", &["C", "D"])],
            DecompositionParams { weights: SimilarityWeights::access_only(), n: 2 },
        )
        .unwrap();
        let sagas = refactor_all(&model, &d, OrchestratorPolicy::FirstStep).unwrap().into_iter().map(|(s, _)| s).collect();
        (model, d, sagas)
    }

    #[test]
    fn fixture_a_contexts_and_coordinations() {
        let (m, d, sagas) = fixture_a();
        let ddd = map_decomposition(&m, &d, &sagas, NamingHeuristic::FullTrace).unwrap();
        assert_eq!(ddd.contexts.len(), 2);
        let coords: Vec<&str> = ddd.coordinations().map(|c| c.functionality.as_str()).collect();
        assert_eq!(coords, vec!["f3", "f4"]);
        // f3 starts in Cluster0, f4 in Cluster1
        assert_eq!(ddd.contexts[0].coordinations[0].name, "f3");
        assert_eq!(ddd.contexts[1].coordinations[0].name, "f4");
        let ops0: Vec<&str> = ddd.contexts[0].service.operations.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(ops0, vec!["rwA_wB", "rA", "wA_rB"]);
        let ops1: Vec<&str> = ddd.contexts[1].service.operations.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(ops1, vec!["rwC_rD", "wC", "rC"]);
    }

    #[test]
    fn single_cluster_has_no_coordinations() {
        let (m, _, _) = fixture_a();
        let d = Decomposition::new(
            vec![Cluster { name: "Cluster0".into(), entities: ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect() }],
            DecompositionParams { weights: SimilarityWeights::access_only(), n: 1 },
        )
        .unwrap();
        let sagas: Vec<Saga> = refactor_all(&m, &d, OrchestratorPolicy::FirstStep).unwrap().into_iter().map(|(s, _)| s).collect();
        let ddd = generate(&m, &d, &sagas, NamingHeuristic::FullTrace).unwrap();
        assert_eq!(ddd.contexts.len(), 1);
        assert_eq!(ddd.coordinations().count(), 0);
        assert!(ddd.relationships.is_empty());
    }

    #[test]
    fn fixture_a_access_stats() {
        let (_, d, sagas) = fixture_a();
        let c = access_stats(&d, &sagas, "Cluster1", "C").unwrap();
        let dd = access_stats(&d, &sagas, "Cluster1", "D").unwrap();
        assert_eq!((c.external, c.external_total), (2, 2));
        assert_eq!((dd.external, dd.external_share()), (0, 0.0));
        assert_eq!((c.local, dd.local, c.local_total), (2, 1, 3));
        assert!(access_stats(&d, &sagas, "Cluster1", "A").is_err());
    }

    #[test]
    fn roots_follow_external_accesses() {
        let (m, d, sagas) = fixture_a();
        let ddd = map_decomposition(&m, &d, &sagas, NamingHeuristic::FullTrace).unwrap();
        let roots: Vec<&str> = ddd
            .contexts
            .iter()
            .map(|c| c.aggregate.entities.iter().find(|e| e.is_aggregate_root).unwrap().name.as_str())
            .collect();
        assert_eq!(roots, vec!["A", "C"]);
    }

    #[test]
    fn missing_saga_is_an_error() {
        let (m, d, mut sagas) = fixture_a();
        sagas.pop();
        assert!(map_decomposition(&m, &d, &sagas, NamingHeuristic::Generic).is_err());
    }

    #[test]
    fn stats_comment_round_trip() {
        let s = AccessStats { external: 2, external_total: 3, local: 0, local_total: 0 };
        assert_eq!(s.to_comment(), "accesses: external 2/3 (66.67%), local 0/0 (0.00%)");
        assert_eq!(AccessStats::parse_comment(&s.to_comment()), Some(s));
        assert_eq!(AccessStats::parse_comment("something else"), None);
    }

    #[test]
    fn marker_round_trip() {
        let o = ReferenceOrigin { context: Some("Cluster1".into()), entity: "Question".into(), inherited_by: vec![] };
        assert_eq!(o.marker(), "generated reference to Cluster1.Question");
        assert_eq!(ReferenceOrigin::parse_marker(&o.marker()), Some((Some("Cluster1".into()), "Question".into())));
        let o = ReferenceOrigin { context: None, entity: "Image".into(), inherited_by: vec![] };
        assert_eq!(ReferenceOrigin::parse_marker(&o.marker()), Some((None, "Image".into())));
    }

    #[test]
    fn sanitized_functionality_names_stay_unique() {
        let m = validate_model(
            vec![
                Functionality::new("Quiz.get", vec![A::read("X")]),
                Functionality::new("Quiz_get", vec![A::read("X")]),
            ],
            vec![],
        );
        let ids = functionality_identifiers(&m);
        assert_eq!(ids["Quiz.get"], "Quiz_get");
        assert_eq!(ids["Quiz_get"], "Quiz_get_2");
    }
}
