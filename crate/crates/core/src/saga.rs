//! Rewrites fine-grained access traces as sagas of cluster-local steps.
//!
//! Consecutive accesses to the same cluster collapse into one step. A later
//! step is then pulled back into the nearest earlier step of its cluster
//! when every step it would jump over is free of read/write conflicts with
//! it. Two steps conflict when they share an entity and at least one of
//! them writes it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::ingest::{Access, Functionality, Mode, MonolithModel};

/// Cluster-local slice of a saga.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub cluster: String,
    pub accesses: Vec<Access>,
}

impl Step {
    fn conflicts_with(&self, other: &Step) -> bool {
        self.accesses.iter().any(|a| {
            other
                .accesses
                .iter()
                .any(|b| a.entity == b.entity && (a.mode == Mode::W || b.mode == Mode::W))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Saga {
    pub functionality: String,
    pub orchestrator: String,
    pub steps: Vec<Step>,
}

impl Saga {
    pub fn is_distributed(&self) -> bool {
        self.steps.len() > 1
    }

    /// Accesses of all steps, concatenated in step order.
    pub fn flattened(&self) -> Vec<&Access> {
        self.steps.iter().flat_map(|s| s.accesses.iter()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionStats {
    pub functionality: String,
    pub clusters_touched: usize,
    /// coarse-grained interactions: saga steps
    pub cgi: usize,
    /// fine-grained interactions: trace accesses
    pub fgi: usize,
    /// `1 - cgi / fgi`
    pub reduction: f64,
}

/// Which cluster owns (orchestrates) a saga.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrchestratorPolicy {
    /// Cluster of the first step.
    #[default]
    FirstStep,
    /// Cluster with the most accesses; ties go to the earliest step.
    MostAccesses,
}

impl FromStr for OrchestratorPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Self::FirstStep),
            "max-accesses" => Ok(Self::MostAccesses),
            other => Err(Error::InvalidArgument(format!(
                "unknown orchestrator policy `{other}` (expected first|max-accesses)"
            ))),
        }
    }
}

impl fmt::Display for OrchestratorPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FirstStep => "first",
            Self::MostAccesses => "max-accesses",
        })
    }
}

/// Groups maximal runs of same-cluster accesses into steps.
pub fn collapse_runs(trace: &[Access], cluster_of: &BTreeMap<String, String>) -> Result<Vec<Step>> {
    let mut steps: Vec<Step> = Vec::new();
    for a in trace {
        let cluster = cluster_of
            .get(&a.entity)
            .ok_or_else(|| Error::UnmappedEntity(a.entity.clone()))?;
        match steps.last_mut() {
            Some(last) if &last.cluster == cluster => last.accesses.push(a.clone()),
            _ => steps.push(Step { cluster: cluster.clone(), accesses: vec![a.clone()] }),
        }
    }
    Ok(steps)
}

fn recollapse(steps: Vec<Step>) -> Vec<Step> {
    let mut out: Vec<Step> = Vec::with_capacity(steps.len());
    for s in steps {
        match out.last_mut() {
            Some(last) if last.cluster == s.cluster => last.accesses.extend(s.accesses),
            _ => out.push(s),
        }
    }
    out
}

/// Merges steps into earlier same-cluster steps wherever that reordering
/// is conflict-free, until no merge applies.
pub fn merge_steps(steps: Vec<Step>) -> Vec<Step> {
    let mut steps = recollapse(steps);
    'outer: loop {
        for j in 1..steps.len() {
            let Some(i) = (0..j).rev().find(|&i| steps[i].cluster == steps[j].cluster) else {
                continue;
            };
            if steps[i + 1..j].iter().all(|k| !k.conflicts_with(&steps[j])) {
                let moved = steps.remove(j);
                steps[i].accesses.extend(moved.accesses);
                steps = recollapse(steps);
                continue 'outer;
            }
        }
        return steps;
    }
}

fn orchestrator(steps: &[Step], policy: OrchestratorPolicy) -> String {
    match policy {
        OrchestratorPolicy::FirstStep => steps[0].cluster.clone(),
        OrchestratorPolicy::MostAccesses => {
            let mut counts: Vec<(&str, usize)> = Vec::new();
            for s in steps {
                match counts.iter_mut().find(|(c, _)| *c == s.cluster) {
                    Some((_, n)) => *n += s.accesses.len(),
                    None => counts.push((&s.cluster, s.accesses.len())),
                }
            }
            // max_by_key keeps the last maximum; iterate reversed to keep the first
            counts
                .iter()
                .rev()
                .max_by_key(|(_, n)| *n)
                .map(|(c, _)| c.to_string())
                .expect("non-empty saga")
        }
    }
}

fn refactor(functionality: &Functionality, cluster_of: &BTreeMap<String, String>, policy: OrchestratorPolicy) -> Result<(Saga, ReductionStats)> {
    if functionality.trace.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "functionality `{}` has an empty trace",
            functionality.name
        )));
    }
    let steps = merge_steps(collapse_runs(&functionality.trace, cluster_of)?);
    let clusters: BTreeSet<&str> = steps.iter().map(|s| s.cluster.as_str()).collect();
    let fgi = functionality.trace.len();
    let stats = ReductionStats {
        functionality: functionality.name.clone(),
        clusters_touched: clusters.len(),
        cgi: steps.len(),
        fgi,
        reduction: 1.0 - steps.len() as f64 / fgi as f64,
    };
    let saga = Saga {
        functionality: functionality.name.clone(),
        orchestrator: orchestrator(&steps, policy),
        steps,
    };
    Ok((saga, stats))
}

/// Saga and reduction statistics for one functionality.
pub fn refactor_functionality(
    model: &MonolithModel,
    decomposition: &Decomposition,
    functionality: &str,
    policy: OrchestratorPolicy,
) -> Result<(Saga, ReductionStats)> {
    let f = model
        .functionality(functionality)
        .ok_or_else(|| Error::UnknownFunctionality(functionality.to_string()))?;
    refactor(f, &decomposition.entity_map(), policy)
}

/// Sagas for every functionality of the model, in model order.
pub fn refactor_all(
    model: &MonolithModel,
    decomposition: &Decomposition,
    policy: OrchestratorPolicy,
) -> Result<Vec<(Saga, ReductionStats)>> {
    let map = decomposition.entity_map();
    model.functionalities().iter().map(|f| refactor(f, &map, policy)).collect()
}

/// `name\tclusters\tCGI\tFGI\treduction%`
pub fn stats_tsv(stats: &[ReductionStats]) -> String {
    let mut out = String::from("name\tclusters\tCGI\tFGI\treduction%\n");
    for s in stats {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.2}",
            s.functionality,
            s.clusters_touched,
            s.cgi,
            s.fgi,
            s.reduction * 100.0
        );
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SagasFile {
    sagas: Vec<SagaEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SagaEntry {
    functionality: String,
    orchestrator: String,
    steps: Vec<StepEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepEntry {
    cluster: String,
    accesses: Vec<(String, Mode)>,
}

pub fn sagas_to_json(sagas: &[Saga]) -> String {
    let file = SagasFile {
        sagas: sagas
            .iter()
            .map(|s| SagaEntry {
                functionality: s.functionality.clone(),
                orchestrator: s.orchestrator.clone(),
                steps: s
                    .steps
                    .iter()
                    .map(|st| StepEntry {
                        cluster: st.cluster.clone(),
                        accesses: st.accesses.iter().map(|a| (a.entity.clone(), a.mode)).collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("sagas serialize") + "\n"
}

pub fn sagas_from_json(text: &str) -> Result<Vec<Saga>> {
    let file: SagasFile = serde_json::from_str(text)?;
    let mut out = Vec::with_capacity(file.sagas.len());
    for (i, s) in file.sagas.into_iter().enumerate() {
        if s.steps.is_empty() {
            return Err(Error::Contract { path: format!("sagas[{i}].steps"), message: "empty saga".into() });
        }
        let mut steps = Vec::with_capacity(s.steps.len());
        for (j, st) in s.steps.into_iter().enumerate() {
            if st.accesses.is_empty() {
                return Err(Error::Contract {
                    path: format!("sagas[{i}].steps[{j}].accesses"),
                    message: "empty step".into(),
                });
            }
            steps.push(Step {
                cluster: st.cluster,
                accesses: st.accesses.into_iter().map(|(e, m)| Access::new(e, m)).collect(),
            });
        }
        if !steps.iter().any(|st| st.cluster == s.orchestrator) {
            return Err(Error::Contract {
                path: format!("sagas[{i}].orchestrator"),
                message: format!("orchestrator `{}` owns no step", s.orchestrator),
            });
        }
        out.push(Saga { functionality: s.functionality, orchestrator: s.orchestrator, steps });
    }
    Ok(out)
}

/// Checks that `sagas` are consistent with the decomposition: every step
/// only touches entities of its own cluster and adjacent steps differ.
pub fn check_sagas(sagas: &[Saga], decomposition: &Decomposition) -> Result<()> {
    let map = decomposition.entity_map();
    for s in sagas {
        for (i, st) in s.steps.iter().enumerate() {
            if decomposition.cluster(&st.cluster).is_none() {
                return Err(Error::UnknownCluster(st.cluster.clone()));
            }
            if let Some(a) = st.accesses.iter().find(|a| map.get(&a.entity) != Some(&st.cluster)) {
                return Err(Error::InvalidArgument(format!(
                    "saga `{}` step {i} accesses `{}` outside cluster `{}`",
                    s.functionality, a.entity, st.cluster
                )));
            }
            if i > 0 && s.steps[i - 1].cluster == st.cluster {
                return Err(Error::InvalidArgument(format!(
                    "saga `{}` has adjacent steps in cluster `{}`",
                    s.functionality, st.cluster
                )));
            }
        }
    }
    Ok(())
}
