use std::collections::BTreeSet;

use super::{Decomposition, DecompositionParams, SimilarityMatrix, SimilarityWeights};
use crate::error::{Error, Result};

/// Distances closer than this are treated as equal for tie-breaking.
const TIE_EPSILON: f64 = 1e-12;

/// One agglomeration step. Clusters are identified by their smallest
/// member index, which is also their lexicographically smallest entity
/// because matrix entities are sorted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
}

/// Full merge history of an average-linkage run.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    entities: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Replays merges until exactly `n` groups remain.
    pub fn cut(&self, n: usize) -> Result<Vec<BTreeSet<String>>> {
        let total = self.entities.len();
        if n < 1 || n > total {
            return Err(Error::InvalidClusterCount { requested: n, entities: total });
        }
        let mut groups: Vec<Option<Vec<usize>>> = (0..total).map(|i| Some(vec![i])).collect();
        for m in &self.merges[..total - n] {
            let right = groups[m.right].take().expect("merged twice");
            groups[m.left].as_mut().expect("merged into absent group").extend(right);
        }
        Ok(groups
            .into_iter()
            .flatten()
            .map(|g| g.into_iter().map(|i| self.entities[i].clone()).collect())
            .collect())
    }
}

/// Average-linkage agglomerative clustering on `1 - similarity`.
///
/// Each step merges the closest pair of clusters, where the distance
/// between clusters is the mean pairwise entity distance. Among pairs
/// within [`TIE_EPSILON`] of the minimum, the pair with the smallest
/// `(first member, second member)` wins.
pub fn average_linkage(sim: &SimilarityMatrix) -> Dendrogram {
    let n = sim.len();
    let mut active: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        let mut distances = Vec::with_capacity(active.len() * (active.len() - 1) / 2);
        let mut min = f64::INFINITY;
        for x in 0..active.len() {
            for y in (x + 1)..active.len() {
                let mut sum = 0.0;
                for &i in &active[x] {
                    for &j in &active[y] {
                        sum += 1.0 - sim.get(i, j);
                    }
                }
                let d = sum / (active[x].len() * active[y].len()) as f64;
                min = min.min(d);
                distances.push((x, y, d));
            }
        }
        // active is kept ordered by smallest member, so the first candidate
        // within tolerance in (x, y) order is the lexicographically least
        let (x, y, d) = distances
            .into_iter()
            .find(|&(_, _, d)| d <= min + TIE_EPSILON)
            .expect("at least one pair");
        let right = active.remove(y);
        merges.push(Merge { left: active[x][0], right: right[0], distance: d });
        active[x].extend(right);
        active[x].sort_unstable();
    }

    Dendrogram { entities: sim.entities().to_vec(), merges }
}

/// Cuts the average-linkage dendrogram of `sim` into `n` clusters.
pub fn cluster(sim: &SimilarityMatrix, n: usize, weights: SimilarityWeights) -> Result<Decomposition> {
    let groups = average_linkage(sim).cut(n)?;
    Decomposition::from_groups(groups, DecompositionParams { weights, n })
}
