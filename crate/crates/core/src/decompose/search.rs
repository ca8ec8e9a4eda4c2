use rayon::prelude::*;

use super::{average_linkage, build_similarity, Decomposition, DecompositionParams, SimilarityWeights};
use crate::error::{Error, Result};
use crate::ingest::MonolithModel;
use crate::measures::{assess, MeasureReport};

/// A generated decomposition together with its quality measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub decomposition: Decomposition,
    pub report: MeasureReport,
}

/// All weight 4-tuples on a grid of `step` that sum to 1, in ascending
/// lexicographic order.
pub fn weight_grid(step: f64) -> Result<Vec<SimilarityWeights>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step {step} must lie in (0, 1]")));
    }
    let slots = (1.0 / step).round();
    if ((1.0 / step) - slots).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("grid step {step} does not divide 1")));
    }
    let k = slots as usize;
    let mut out = Vec::new();
    for a in 0..=k {
        for w in 0..=(k - a) {
            for r in 0..=(k - a - w) {
                let s = k - a - w - r;
                let f = |x: usize| x as f64 / k as f64;
                out.push(SimilarityWeights { access: f(a), write: f(w), read: f(r), sequence: f(s) });
            }
        }
    }
    Ok(out)
}

/// Generates one decomposition per (weight tuple, cluster count) pair,
/// each with its measures, ordered by weights then `n`. Partitions that
/// repeat across weight tuples are kept.
pub fn search_decompositions(model: &MonolithModel, n_values: &[usize], step: f64) -> Result<Vec<Candidate>> {
    let grid = weight_grid(step)?;
    if n_values.is_empty() {
        return Err(Error::InvalidArgument("empty cluster-count range".into()));
    }
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let entities = model.accessed_entities().len();
    if let Some(&bad) = ns.iter().find(|&&n| n < 1 || n > entities) {
        return Err(Error::InvalidClusterCount { requested: bad, entities });
    }

    let per_weight: Vec<Result<Vec<Candidate>>> = grid
        .par_iter()
        .map(|&weights| {
            let dendrogram = average_linkage(&build_similarity(model, weights)?);
            ns.iter()
                .map(|&n| {
                    let decomposition =
                        Decomposition::from_groups(dendrogram.cut(n)?, DecompositionParams { weights, n })?;
                    let report = assess(model, &decomposition)?;
                    Ok(Candidate { decomposition, report })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(grid.len() * ns.len());
    for batch in per_weight {
        out.extend(batch?);
    }
    Ok(out)
}

/// Same as [`search_decompositions`] but on a dedicated pool of `threads`
/// workers; `None` uses the global pool.
pub fn search_decompositions_with_threads(
    model: &MonolithModel,
    n_values: &[usize],
    step: f64,
    threads: Option<usize>,
) -> Result<Vec<Candidate>> {
    match threads {
        None => search_decompositions(model, n_values, step),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| search_decompositions(model, n_values, step))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{validate_model, Access, Functionality};

    #[test]
    fn grid_sizes() {
        assert_eq!(weight_grid(1.0).unwrap().len(), 4);
        assert_eq!(weight_grid(0.5).unwrap().len(), 10);
        // C(10 + 3, 3)
        assert_eq!(weight_grid(0.1).unwrap().len(), 286);
        assert!(weight_grid(0.3).is_err());
        assert!(weight_grid(0.0).is_err());
    }

    #[test]
    fn grid_points_are_valid_weights() {
        for w in weight_grid(0.25).unwrap() {
            let a = w.to_array();
            assert!(SimilarityWeights::from_array(a).is_ok(), "{a:?}");
        }
    }

    fn model() -> MonolithModel {
        validate_model(
            vec![
                Functionality::new("f1", vec![Access::read("A"), Access::write("B")]),
                Functionality::new("f2", vec![Access::read("C"), Access::write("A")]),
            ],
            vec![],
        )
    }

    #[test]
    fn step_one_gives_four_candidates_per_n() {
        let cs = search_decompositions(&model(), &[2], 1.0).unwrap();
        assert_eq!(cs.len(), 4);
        let cs = search_decompositions(&model(), &[1, 2, 3], 1.0).unwrap();
        assert_eq!(cs.len(), 12);
        assert_eq!(cs[0].decomposition.params().n, 1);
        assert_eq!(cs[1].decomposition.params().n, 2);
    }

    #[test]
    fn search_errors() {
        assert!(search_decompositions(&model(), &[], 1.0).is_err());
        assert!(search_decompositions(&model(), &[4], 1.0).is_err());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let a = search_decompositions_with_threads(&model(), &[1, 2, 3], 0.25, Some(1)).unwrap();
        let b = search_decompositions_with_threads(&model(), &[1, 2, 3], 0.25, Some(4)).unwrap();
        assert_eq!(a, b);
    }
}
