//! Cohesion, coupling, size and complexity of decompositions, and the
//! candidate selection heuristic.
//!
//! With `F(c)` the functionalities touching cluster `c` (accessing at least
//! one of its entities) and `E(c)` its entities:
//!
//! * cohesion(c): mean over `F(c)` of the fraction of `E(c)` each one
//!   accesses; 0 when `F(c)` is empty.
//! * coupling(c): for every other cluster `c'`, the fraction of `E(c')`
//!   reached by a trace step leaving an entity of `c`, averaged over the
//!   `k - 1` other clusters; 0 for a single cluster.
//! * complexity(f): 0 for a functionality local to one cluster, otherwise
//!   the sum over its accesses of how many *other* distributed
//!   functionalities access the same entity with the opposite mode.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::decompose::{Candidate, Decomposition};
use crate::error::{Error, Result};
use crate::ingest::{Mode, MonolithModel};

/// Number of top candidates considered by default in selection.
pub const DEFAULT_TOP_K: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMeasures {
    pub cluster: String,
    pub size: usize,
    pub functionalities: usize,
    pub cohesion: f64,
    pub coupling: f64,
    pub complexity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub clusters: Vec<ClusterMeasures>,
    /// Mean cluster size.
    pub size: f64,
    /// Mean cohesion over clusters.
    pub cohesion: f64,
    /// Mean coupling over clusters.
    pub coupling: f64,
    /// Mean complexity over all functionalities.
    pub complexity: f64,
    /// Per-functionality complexity, in model order.
    pub functionality_complexity: Vec<(String, f64)>,
}

impl MeasureReport {
    /// TSV with one row per cluster.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("cluster\tentities\tfunctionalities\tcohesion\tcoupling\tcomplexity\n");
        for c in &self.clusters {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}",
                c.cluster, c.size, c.functionalities, c.cohesion, c.coupling, c.complexity
            );
        }
        out
    }
}

/// Precomputed lookups shared by all measures of one decomposition.
struct Evaluator<'a> {
    model: &'a MonolithModel,
    decomposition: &'a Decomposition,
    cluster_of: HashMap<&'a str, usize>,
    /// clusters touched per functionality
    touched: Vec<BTreeSet<usize>>,
}

impl<'a> Evaluator<'a> {
    fn new(model: &'a MonolithModel, decomposition: &'a Decomposition) -> Result<Self> {
        let cluster_of: HashMap<&str, usize> = decomposition
            .clusters()
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.entities.iter().map(move |e| (e.as_str(), i)))
            .collect();
        let mut touched = Vec::with_capacity(model.functionalities().len());
        for f in model.functionalities() {
            let mut set = BTreeSet::new();
            for a in &f.trace {
                let c = cluster_of
                    .get(a.entity.as_str())
                    .ok_or_else(|| Error::UnmappedEntity(a.entity.clone()))?;
                set.insert(*c);
            }
            touched.push(set);
        }
        Ok(Self { model, decomposition, cluster_of, touched })
    }

    fn cluster_index(&self, name: &str) -> Result<usize> {
        self.decomposition
            .clusters()
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownCluster(name.to_string()))
    }

    fn is_distributed(&self, f: usize) -> bool {
        self.touched[f].len() >= 2
    }

    fn touching(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.touched.len()).filter(move |&f| self.touched[f].contains(&c))
    }

    fn cohesion(&self, c: usize) -> f64 {
        let cluster = &self.decomposition.clusters()[c];
        let size = cluster.entities.len() as f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        for f in self.touching(c) {
            let accessed: BTreeSet<&str> = self.model.functionalities()[f]
                .trace
                .iter()
                .map(|a| a.entity.as_str())
                .filter(|e| cluster.entities.contains(*e))
                .collect();
            sum += accessed.len() as f64 / size;
            count += 1;
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    fn coupling(&self, c: usize) -> f64 {
        let k = self.decomposition.len();
        if k <= 1 {
            return 0.0;
        }
        let mut reached: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); k];
        for f in self.model.functionalities() {
            for pair in f.trace.windows(2) {
                let from = self.cluster_of[pair[0].entity.as_str()];
                let to = self.cluster_of[pair[1].entity.as_str()];
                if from == c && to != c {
                    reached[to].insert(pair[1].entity.as_str());
                }
            }
        }
        let sum: f64 = self
            .decomposition
            .clusters()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != c)
            .map(|(i, other)| reached[i].len() as f64 / other.entities.len() as f64)
            .sum();
        sum / (k - 1) as f64
    }

    fn complexity(&self, f: usize) -> f64 {
        if !self.is_distributed(f) {
            return 0.0;
        }
        let functionalities = self.model.functionalities();
        let mut total = 0usize;
        for a in &functionalities[f].trace {
            let opposite = match a.mode {
                Mode::R => Mode::W,
                Mode::W => Mode::R,
            };
            total += (0..functionalities.len())
                .filter(|&g| g != f && self.is_distributed(g))
                .filter(|&g| {
                    functionalities[g]
                        .trace
                        .iter()
                        .any(|b| b.entity == a.entity && b.mode == opposite)
                })
                .count();
        }
        total as f64
    }

    fn report(&self) -> MeasureReport {
        let fcomplexity: Vec<f64> = (0..self.touched.len()).map(|f| self.complexity(f)).collect();
        let clusters: Vec<ClusterMeasures> = self
            .decomposition
            .clusters()
            .iter()
            .enumerate()
            .map(|(c, cluster)| {
                let touching: Vec<usize> = self.touching(c).collect();
                let complexity = mean(touching.iter().map(|&f| fcomplexity[f]));
                ClusterMeasures {
                    cluster: cluster.name.clone(),
                    size: cluster.entities.len(),
                    functionalities: touching.len(),
                    cohesion: self.cohesion(c),
                    coupling: self.coupling(c),
                    complexity,
                }
            })
            .collect();
        MeasureReport {
            size: mean(clusters.iter().map(|c| c.size as f64)),
            cohesion: mean(clusters.iter().map(|c| c.cohesion)),
            coupling: mean(clusters.iter().map(|c| c.coupling)),
            complexity: mean(fcomplexity.iter().copied()),
            functionality_complexity: self
                .model
                .functionalities()
                .iter()
                .zip(fcomplexity)
                .map(|(f, c)| (f.name.clone(), c))
                .collect(),
            clusters,
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn cohesion(model: &MonolithModel, decomposition: &Decomposition, cluster: &str) -> Result<f64> {
    let ev = Evaluator::new(model, decomposition)?;
    Ok(ev.cohesion(ev.cluster_index(cluster)?))
}

pub fn coupling(model: &MonolithModel, decomposition: &Decomposition, cluster: &str) -> Result<f64> {
    let ev = Evaluator::new(model, decomposition)?;
    Ok(ev.coupling(ev.cluster_index(cluster)?))
}

pub fn complexity(model: &MonolithModel, decomposition: &Decomposition, functionality: &str) -> Result<f64> {
    let ev = Evaluator::new(model, decomposition)?;
    let f = model
        .functionalities()
        .iter()
        .position(|f| f.name == functionality)
        .ok_or_else(|| Error::UnknownFunctionality(functionality.to_string()))?;
    Ok(ev.complexity(f))
}

/// All measures for every cluster plus decomposition-level means.
pub fn assess(model: &MonolithModel, decomposition: &Decomposition) -> Result<MeasureReport> {
    decomposition.check_against(model)?;
    Ok(Evaluator::new(model, decomposition)?.report())
}

/// Orders candidates by coupling ascending, then cohesion descending, and
/// picks the one with the lowest complexity among the first `top_k`.
///
/// Remaining ties fall back to the serialized decomposition, so the result
/// does not depend on the order of `candidates`.
pub fn rank_decompositions(candidates: &[Candidate], top_k: usize) -> Option<&Candidate> {
    let keyed: Vec<(&Candidate, String)> = candidates.iter().map(|c| (c, c.decomposition.to_json())).collect();
    let mut order: Vec<usize> = (0..keyed.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, sa) = &keyed[a];
        let (cb, sb) = &keyed[b];
        ca.report
            .coupling
            .total_cmp(&cb.report.coupling)
            .then(cb.report.cohesion.total_cmp(&ca.report.cohesion))
            .then(ca.report.complexity.total_cmp(&cb.report.complexity))
            .then_with(|| sa.cmp(sb))
    });
    order
        .into_iter()
        .take(top_k.max(1))
        .min_by(|&a, &b| {
            let (ca, sa) = &keyed[a];
            let (cb, sb) = &keyed[b];
            match ca.report.complexity.total_cmp(&cb.report.complexity) {
                Ordering::Equal => sa.cmp(sb),
                o => o,
            }
        })
        .map(|i| keyed[i].0)
}
