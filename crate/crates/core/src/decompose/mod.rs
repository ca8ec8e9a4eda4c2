//! Entity similarity and hierarchical clustering into candidate
//! decompositions.

mod linkage;
mod search;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use linkage::{average_linkage, cluster, Dendrogram, Merge};
pub use search::{search_decompositions, search_decompositions_with_threads, weight_grid, Candidate};

use crate::error::{Error, Result};
use crate::ident::is_identifier;
use crate::ingest::{Mode, MonolithModel};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Relative importance of the four access-based similarity criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityWeights {
    pub access: f64,
    pub write: f64,
    pub read: f64,
    pub sequence: f64,
}

impl SimilarityWeights {
    pub fn new(access: f64, write: f64, read: f64, sequence: f64) -> Result<Self> {
        let w = Self { access, write, read, sequence };
        let parts = w.to_array();
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(Error::InvalidWeights(format!("{parts:?} must lie in [0, 1]")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("{parts:?} sum to {sum}, expected 1")));
        }
        Ok(w)
    }

    /// Pure access-set similarity.
    pub fn access_only() -> Self {
        Self { access: 1.0, write: 0.0, read: 0.0, sequence: 0.0 }
    }

    /// `[access, write, read, sequence]`, the order used in files.
    pub fn to_array(self) -> [f64; 4] {
        [self.access, self.write, self.read, self.sequence]
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// Symmetric entity-by-entity similarity with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    entities: Vec<String>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a matrix from explicit values, checking symmetry, bounds and
    /// the unit diagonal.
    pub fn from_values(entities: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = entities.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!("similarity matrix must be {n}x{n}")));
        }
        for i in 0..n {
            if values[i][i] != 1.0 {
                return Err(Error::InvalidArgument("similarity diagonal must be 1".into()));
            }
            for j in 0..n {
                let v = values[i][j];
                if !(0.0..=1.0).contains(&v) || v != values[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "similarity ({i},{j}) = {v} is out of range or asymmetric"
                    )));
                }
            }
        }
        Ok(Self { entities, values: values.into_iter().flatten().collect() })
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.entities.len() + j]
    }

    pub fn by_name(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.entities.iter().position(|e| e == a)?;
        let j = self.entities.iter().position(|e| e == b)?;
        Some(self.get(i, j))
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Builds the weighted similarity matrix over the model's accessed entities.
///
/// For an ordered pair `(e1, e2)` the asymmetric terms are the share of
/// `e1`'s functionalities (all, reading, writing) that also touch `e2` the
/// same way. The sequence term counts adjacent trace positions holding the
/// pair in either order, normalised by the largest such count. The matrix
/// is the mean of the two orderings.
pub fn build_similarity(model: &MonolithModel, weights: SimilarityWeights) -> Result<SimilarityMatrix> {
    if model.functionalities().is_empty() {
        return Err(Error::InvalidArgument("model has no functionalities".into()));
    }
    let entities: Vec<String> = model.accessed_entities().into_iter().map(String::from).collect();
    let n = entities.len();
    let index: HashMap<&str, usize> = entities.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();

    let mut all: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    let mut reads: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    let mut writes: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    let mut adjacent = vec![0usize; n * n];
    for (fi, f) in model.functionalities().iter().enumerate() {
        for a in &f.trace {
            let e = index[a.entity.as_str()];
            all[e].insert(fi);
            match a.mode {
                Mode::R => reads[e].insert(fi),
                Mode::W => writes[e].insert(fi),
            };
        }
        for pair in f.trace.windows(2) {
            let (x, y) = (index[pair[0].entity.as_str()], index[pair[1].entity.as_str()]);
            if x != y {
                adjacent[x * n + y] += 1;
                adjacent[y * n + x] += 1;
            }
        }
    }
    let max_adjacent = adjacent.iter().copied().max().unwrap_or(0);

    let directed = |i: usize, j: usize| -> f64 {
        let a = ratio(all[i].intersection(&all[j]).count(), all[i].len());
        let wr = ratio(writes[i].intersection(&writes[j]).count(), writes[i].len());
        let rd = ratio(reads[i].intersection(&reads[j]).count(), reads[i].len());
        let sq = ratio(adjacent[i * n + j], max_adjacent);
        weights.access * a + weights.write * wr + weights.read * rd + weights.sequence * sq
    };

    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let v = ((directed(i, j) + directed(j, i)) / 2.0).clamp(0.0, 1.0);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(SimilarityMatrix { entities, values })
}

/// A named group of entities.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cluster {
    pub name: String,
    pub entities: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionParams {
    pub weights: SimilarityWeights,
    pub n: usize,
}

/// A partition of entities into named, non-empty, disjoint clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    clusters: Vec<Cluster>,
    params: DecompositionParams,
}

impl Decomposition {
    pub fn new(clusters: Vec<Cluster>, params: DecompositionParams) -> Result<Self> {
        let mut names = HashSet::new();
        let mut seen = HashSet::new();
        for c in &clusters {
            if !is_identifier(&c.name) {
                return Err(Error::InvalidIdentifier(c.name.clone()));
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidDecomposition(format!("duplicate cluster `{}`", c.name)));
            }
            if c.entities.is_empty() {
                return Err(Error::InvalidDecomposition(format!("cluster `{}` is empty", c.name)));
            }
            for e in &c.entities {
                if !seen.insert(e.as_str()) {
                    return Err(Error::InvalidDecomposition(format!(
                        "entity `{e}` appears in more than one cluster"
                    )));
                }
            }
        }
        Ok(Self { clusters, params })
    }

    /// Names groups `Cluster0..` ordered by each group's smallest entity.
    pub fn from_groups(groups: Vec<BTreeSet<String>>, params: DecompositionParams) -> Result<Self> {
        let mut groups = groups;
        groups.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
        let clusters = groups
            .into_iter()
            .enumerate()
            .map(|(i, entities)| Cluster { name: format!("Cluster{i}"), entities })
            .collect();
        Self::new(clusters, params)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, name: &str) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.name == name)
    }

    pub fn params(&self) -> DecompositionParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster_of(&self, entity: &str) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.entities.contains(entity))
    }

    /// entity name -> cluster name
    pub fn entity_map(&self) -> BTreeMap<String, String> {
        self.clusters
            .iter()
            .flat_map(|c| c.entities.iter().map(move |e| (e.clone(), c.name.clone())))
            .collect()
    }

    /// Checks that every accessed entity of `model` is assigned and that no
    /// cluster names an entity the model does not know.
    pub fn check_against(&self, model: &MonolithModel) -> Result<()> {
        for c in &self.clusters {
            if let Some(e) = c.entities.iter().find(|e| !model.contains_entity(e)) {
                return Err(Error::InvalidDecomposition(format!(
                    "cluster `{}` contains unknown entity `{e}`",
                    c.name
                )));
            }
        }
        match model.accessed_entities().into_iter().find(|e| self.cluster_of(e).is_none()) {
            Some(e) => Err(Error::UnmappedEntity(e.to_string())),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DecompositionFile::from(self)).expect("decomposition serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DecompositionFile = serde_json::from_str(text)?;
        let weights = SimilarityWeights::from_array(file.params.weights)?;
        let clusters = file
            .clusters
            .into_iter()
            .map(|(name, entities)| Cluster { name, entities: entities.into_iter().collect() })
            .collect();
        Self::new(clusters, DecompositionParams { weights, n: file.params.n })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    weights: [f64; 4],
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionFile {
    params: ParamsFile,
    clusters: IndexMap<String, Vec<String>>,
}

impl From<&Decomposition> for DecompositionFile {
    fn from(d: &Decomposition) -> Self {
        Self {
            params: ParamsFile { weights: d.params.weights.to_array(), n: d.params.n },
            clusters: d
                .clusters
                .iter()
                .map(|c| (c.name.clone(), c.entities.iter().cloned().collect()))
                .collect(),
        }
    }
}
