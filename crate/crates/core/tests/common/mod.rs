//! Shared fixtures, random generators and independent reference
//! implementations for the integration tests.
//!
//! The oracles below work on plain strings and vectors and do not call into
//! the library, so agreement between the two is meaningful.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use mono2ddd::decompose::{Cluster, Decomposition, DecompositionParams, SimilarityWeights};
use mono2ddd::ingest::{
    parse_accesses, parse_structure, validate_model, Access, EntityStructure, Functionality, Mode, MonolithModel,
    Reference,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn data(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(path)
}

pub fn read(path: &str) -> String {
    std::fs::read_to_string(data(path)).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn load_model(dir: &str, structure: &str) -> MonolithModel {
    let f = parse_accesses(&read(&format!("{dir}/accesses.json"))).unwrap();
    let s = parse_structure(&read(&format!("{dir}/{structure}"))).unwrap();
    validate_model(f, s)
}

pub fn fixture_a() -> MonolithModel {
    load_model("fixture_a", "structure.json")
}

pub fn quizzes() -> MonolithModel {
    load_model("quizzes", "structure.txt")
}

/// Traces as `(entity, is_write)` lists, keyed by functionality, in model
/// order.
pub type RawTraces = Vec<(String, Vec<(String, bool)>)>;

pub fn raw_traces(model: &MonolithModel) -> RawTraces {
    model
        .functionalities()
        .iter()
        .map(|f| (f.name.clone(), f.trace.iter().map(|a| (a.entity.clone(), a.mode == Mode::W)).collect()))
        .collect()
}

pub fn entity_name(i: usize) -> String {
    format!("E{i}")
}

/// A random model with up to `max_entities` accessed entities,
/// `max_functionalities` functionalities and traces of length
/// `1..=max_trace`.
pub fn random_model(rng: &mut ChaCha8Rng, max_entities: usize, max_functionalities: usize, max_trace: usize) -> MonolithModel {
    let n_entities = rng.gen_range(1..=max_entities);
    let n_funcs = rng.gen_range(1..=max_functionalities);
    let functionalities = (0..n_funcs)
        .map(|fi| {
            let len = rng.gen_range(1..=max_trace);
            let trace = (0..len)
                .map(|_| {
                    let e = entity_name(rng.gen_range(0..n_entities));
                    if rng.gen_bool(0.5) {
                        Access::read(e)
                    } else {
                        Access::write(e)
                    }
                })
                .collect();
            Functionality::new(format!("f{fi}"), trace)
        })
        .collect();
    validate_model(functionalities, Vec::new())
}

/// Like [`random_model`] but every entity (plus a few structure-only ones)
/// gets attributes and random references, at most one of them inheritance.
pub fn random_model_with_structure(rng: &mut ChaCha8Rng, max_entities: usize, max_functionalities: usize, max_trace: usize) -> MonolithModel {
    let base = random_model(rng, max_entities, max_functionalities, max_trace);
    let accessed: Vec<String> = base.accessed_entities().into_iter().map(String::from).collect();
    let extra = rng.gen_range(0..=2);
    let all: Vec<String> = accessed.iter().cloned().chain((0..extra).map(|i| format!("Orphan{i}"))).collect();
    let types = ["String", "Integer", "List<String>", "Map<String,Integer>", "Boolean"];
    let structures = all
        .iter()
        .map(|name| {
            let mut s = EntityStructure::new(name.as_str());
            for a in 0..rng.gen_range(0..=2) {
                s = s.with_attribute(&format!("attr{a}"), types.choose(rng).unwrap());
            }
            let mut inherited = false;
            for r in 0..rng.gen_range(0..=3) {
                let target = all.choose(rng).unwrap().clone();
                if !inherited && rng.gen_bool(0.2) && &target != name {
                    s = s.with_reference(Reference::inheritance("super", target));
                    inherited = true;
                } else {
                    s = s.with_reference(Reference::association(format!("ref{r}"), target));
                }
            }
            s
        })
        .collect();
    validate_model(base.functionalities().to_vec(), structures)
}

/// Random partition of the model's accessed entities into `1..=max`
/// clusters, named the way the library names them.
pub fn random_decomposition(rng: &mut ChaCha8Rng, model: &MonolithModel, max_clusters: usize) -> Decomposition {
    let entities: Vec<String> = model.accessed_entities().into_iter().map(String::from).collect();
    let k = rng.gen_range(1..=max_clusters.min(entities.len()));
    let mut shuffled = entities.clone();
    shuffled.shuffle(rng);
    let mut groups: Vec<BTreeSet<String>> = vec![BTreeSet::new(); k];
    for (i, e) in shuffled.into_iter().enumerate() {
        let g = if i < k { i } else { rng.gen_range(0..k) };
        groups[g].insert(e);
    }
    Decomposition::from_groups(groups, DecompositionParams { weights: SimilarityWeights::access_only(), n: k }).unwrap()
}

pub fn partition_of(d: &Decomposition) -> Vec<Vec<String>> {
    d.clusters().iter().map(|c| c.entities.iter().cloned().collect()).collect()
}

pub fn decomposition_from(groups: &[&[&str]]) -> Decomposition {
    let clusters = groups
        .iter()
        .enumerate()
        .map(|(i, g)| Cluster { name: format!("Cluster{i}"), entities: g.iter().map(|s| s.to_string()).collect() })
        .collect();
    Decomposition::new(clusters, DecompositionParams { weights: SimilarityWeights::access_only(), n: groups.len() })
        .unwrap()
}

// ---------------------------------------------------------------------------
// Measures oracle

fn owner_map(partition: &[Vec<String>]) -> BTreeMap<&str, usize> {
    let mut m = BTreeMap::new();
    for (i, g) in partition.iter().enumerate() {
        for e in g {
            m.insert(e.as_str(), i);
        }
    }
    m
}

/// Cohesion of cluster `c`, straight from the definition.
pub fn oracle_cohesion(traces: &RawTraces, partition: &[Vec<String>], c: usize) -> f64 {
    let members: BTreeSet<&str> = partition[c].iter().map(String::as_str).collect();
    let mut fractions = Vec::new();
    for (_, t) in traces {
        let hit: BTreeSet<&str> = t.iter().map(|(e, _)| e.as_str()).filter(|e| members.contains(e)).collect();
        if !hit.is_empty() {
            fractions.push(hit.len() as f64 / members.len() as f64);
        }
    }
    if fractions.is_empty() {
        0.0
    } else {
        fractions.iter().sum::<f64>() / fractions.len() as f64
    }
}

/// Coupling of cluster `c`, straight from the definition.
pub fn oracle_coupling(traces: &RawTraces, partition: &[Vec<String>], c: usize) -> f64 {
    let k = partition.len();
    if k < 2 {
        return 0.0;
    }
    let owner = owner_map(partition);
    let mut total = 0.0;
    for (other, members) in partition.iter().enumerate() {
        if other == c {
            continue;
        }
        let mut reached = BTreeSet::new();
        for (_, t) in traces {
            for i in 1..t.len() {
                if owner[t[i - 1].0.as_str()] == c && owner[t[i].0.as_str()] == other {
                    reached.insert(t[i].0.clone());
                }
            }
        }
        total += reached.len() as f64 / members.len() as f64;
    }
    total / (k - 1) as f64
}

/// Complexity of functionality `f`, straight from the definition.
pub fn oracle_complexity(traces: &RawTraces, partition: &[Vec<String>], f: usize) -> f64 {
    let owner = owner_map(partition);
    let distributed = |t: &Vec<(String, bool)>| {
        let cs: BTreeSet<usize> = t.iter().map(|(e, _)| owner[e.as_str()]).collect();
        cs.len() > 1
    };
    if !distributed(&traces[f].1) {
        return 0.0;
    }
    let mut sum = 0usize;
    for (entity, write) in &traces[f].1 {
        for (g, (_, other)) in traces.iter().enumerate() {
            if g != f && distributed(other) && other.iter().any(|(e, w)| e == entity && *w != *write) {
                sum += 1;
            }
        }
    }
    sum as f64
}

pub struct OracleMeasures {
    pub cohesion: f64,
    pub coupling: f64,
    pub complexity: f64,
}

/// Decomposition-level means.
pub fn oracle_measures(traces: &RawTraces, partition: &[Vec<String>]) -> OracleMeasures {
    let k = partition.len() as f64;
    let cohesion = (0..partition.len()).map(|c| oracle_cohesion(traces, partition, c)).sum::<f64>() / k;
    let coupling = (0..partition.len()).map(|c| oracle_coupling(traces, partition, c)).sum::<f64>() / k;
    let complexity =
        (0..traces.len()).map(|f| oracle_complexity(traces, partition, f)).sum::<f64>() / traces.len() as f64;
    OracleMeasures { cohesion, coupling, complexity }
}

// ---------------------------------------------------------------------------
// Similarity and clustering oracle

/// Symmetrised weighted similarity over the sorted accessed entities.
pub fn oracle_similarity(traces: &RawTraces, weights: [f64; 4]) -> (Vec<String>, Vec<Vec<f64>>) {
    let entities: Vec<String> =
        traces.iter().flat_map(|(_, t)| t.iter().map(|(e, _)| e.clone())).collect::<BTreeSet<_>>().into_iter().collect();
    let funcs_with = |e: &str, mode: Option<bool>| -> BTreeSet<usize> {
        traces
            .iter()
            .enumerate()
            .filter(|(_, (_, t))| t.iter().any(|(x, w)| x == e && mode.is_none_or(|m| m == *w)))
            .map(|(i, _)| i)
            .collect()
    };
    let share = |a: &BTreeSet<usize>, b: &BTreeSet<usize>| {
        if a.is_empty() {
            0.0
        } else {
            a.intersection(b).count() as f64 / a.len() as f64
        }
    };
    let pair_count = |a: &str, b: &str| -> usize {
        traces
            .iter()
            .map(|(_, t)| {
                t.windows(2).filter(|w| (w[0].0 == a && w[1].0 == b) || (w[0].0 == b && w[1].0 == a)).count()
            })
            .sum()
    };
    let mut max_pairs = 0;
    for a in &entities {
        for b in &entities {
            if a != b {
                max_pairs = max_pairs.max(pair_count(a, b));
            }
        }
    }
    let directed = |a: &str, b: &str| -> f64 {
        let acc = share(&funcs_with(a, None), &funcs_with(b, None));
        let wr = share(&funcs_with(a, Some(true)), &funcs_with(b, Some(true)));
        let rd = share(&funcs_with(a, Some(false)), &funcs_with(b, Some(false)));
        let sq = if max_pairs == 0 { 0.0 } else { pair_count(a, b) as f64 / max_pairs as f64 };
        weights[0] * acc + weights[1] * wr + weights[2] * rd + weights[3] * sq
    };
    let n = entities.len();
    let mut m = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[i][j] = (directed(&entities[i], &entities[j]) + directed(&entities[j], &entities[i])) / 2.0;
            }
        }
    }
    (entities, m)
}

/// Average linkage via Lance-Williams updates, cut at `n` clusters. Ties
/// (within 1e-12) go to the pair whose smallest members are least.
pub fn oracle_cluster(entities: &[String], sim: &[Vec<f64>], n: usize) -> Vec<Vec<String>> {
    let mut clusters: Vec<Vec<usize>> = (0..entities.len()).map(|i| vec![i]).collect();
    let mut dist: Vec<Vec<f64>> = sim.iter().map(|row| row.iter().map(|s| 1.0 - s).collect()).collect();
    while clusters.len() > n {
        let mut best: Option<(f64, usize, usize)> = None;
        let min = (0..clusters.len())
            .flat_map(|x| ((x + 1)..clusters.len()).map(move |y| (x, y)))
            .map(|(x, y)| dist[x][y])
            .fold(f64::INFINITY, f64::min);
        for x in 0..clusters.len() {
            for y in (x + 1)..clusters.len() {
                if dist[x][y] <= min + 1e-12 {
                    let key = (clusters[x][0].min(clusters[y][0]), clusters[x][0].max(clusters[y][0]));
                    match best {
                        Some((_, bx, by)) => {
                            let bkey = (clusters[bx][0].min(clusters[by][0]), clusters[bx][0].max(clusters[by][0]));
                            if key < bkey {
                                best = Some((dist[x][y], x, y));
                            }
                        }
                        None => best = Some((dist[x][y], x, y)),
                    }
                }
            }
        }
        let (_, x, y) = best.unwrap();
        let (sx, sy) = (clusters[x].len() as f64, clusters[y].len() as f64);
        for k in 0..clusters.len() {
            if k != x && k != y {
                let d = (sx * dist[x][k] + sy * dist[y][k]) / (sx + sy);
                dist[x][k] = d;
                dist[k][x] = d;
            }
        }
        let moved = clusters.remove(y);
        dist.remove(y);
        for row in &mut dist {
            row.remove(y);
        }
        clusters[x].extend(moved);
        clusters[x].sort_unstable();
    }
    let mut out: Vec<Vec<String>> =
        clusters.into_iter().map(|c| c.into_iter().map(|i| entities[i].clone()).collect()).collect();
    out.sort();
    out
}

pub struct OracleCandidate {
    pub weights: [f64; 4],
    pub n: usize,
    pub partition: Vec<Vec<String>>,
    pub measures: OracleMeasures,
}

/// Every weight tuple on a `1/steps` grid, lexicographic.
pub fn oracle_grid(steps: usize) -> Vec<[f64; 4]> {
    let mut out = Vec::new();
    for a in 0..=steps {
        for w in 0..=steps {
            for r in 0..=steps {
                for s in 0..=steps {
                    if a + w + r + s == steps {
                        let f = |x: usize| x as f64 / steps as f64;
                        out.push([f(a), f(w), f(r), f(s)]);
                    }
                }
            }
        }
    }
    out
}

/// Exhaustive selection: sort all candidates by coupling ascending then
/// cohesion descending, keep `top_k`, take the least complex; remaining
/// ties by (weights, n).
pub fn oracle_select(traces: &RawTraces, steps: usize, ns: &[usize], top_k: usize) -> OracleCandidate {
    let mut all = Vec::new();
    for weights in oracle_grid(steps) {
        let (entities, sim) = oracle_similarity(traces, weights);
        for &n in ns {
            let partition = oracle_cluster(&entities, &sim, n);
            let measures = oracle_measures(traces, &partition);
            all.push(OracleCandidate { weights, n, partition, measures });
        }
    }
    let tie = |a: &OracleCandidate, b: &OracleCandidate| {
        a.weights.partial_cmp(&b.weights).unwrap().then(a.n.cmp(&b.n))
    };
    all.sort_by(|a, b| {
        a.measures
            .coupling
            .partial_cmp(&b.measures.coupling)
            .unwrap()
            .then(b.measures.cohesion.partial_cmp(&a.measures.cohesion).unwrap())
            .then(a.measures.complexity.partial_cmp(&b.measures.complexity).unwrap())
            .then(tie(a, b))
    });
    all.truncate(top_k);
    all.into_iter()
        .min_by(|a, b| a.measures.complexity.partial_cmp(&b.measures.complexity).unwrap().then(tie(a, b)))
        .unwrap()
}

// ---------------------------------------------------------------------------
// DOT checker

/// Accepts the DOT language subset: `[strict] (graph|digraph) [ID] {
/// stmt* }` with node, edge and attribute statements and `[a=b, ...]`
/// attribute lists. Edge operators must match the graph kind.
pub fn check_dot(text: &str) -> Result<(), String> {
    #[derive(Debug, Clone, PartialEq)]
    enum T {
        Id(String),
        LBrace,
        RBrace,
        LBracket,
        RBracket,
        Eq,
        Semi,
        Comma,
        Edge(&'static str),
    }
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('\\') => {
                        s.push(*chars.get(i + 1).ok_or("dangling escape")?);
                        i += 2;
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            toks.push(T::Id(s));
        } else if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            toks.push(T::Id(chars[start..i].iter().collect()));
        } else if c == '-' && matches!(chars.get(i + 1), Some('>') | Some('-')) {
            toks.push(T::Edge(if chars[i + 1] == '>' { "->" } else { "--" }));
            i += 2;
        } else {
            toks.push(match c {
                '{' => T::LBrace,
                '}' => T::RBrace,
                '[' => T::LBracket,
                ']' => T::RBracket,
                '=' => T::Eq,
                ';' => T::Semi,
                ',' => T::Comma,
                _ => return Err(format!("unexpected character {c:?}")),
            });
            i += 1;
        }
    }
    let mut p = 0;
    let kw = |t: Option<&T>, k: &str| matches!(t, Some(T::Id(s)) if s.eq_ignore_ascii_case(k));
    if kw(toks.get(p), "strict") {
        p += 1;
    }
    let op = if kw(toks.get(p), "digraph") {
        "->"
    } else if kw(toks.get(p), "graph") {
        "--"
    } else {
        return Err("expected graph or digraph".into());
    };
    p += 1;
    if let Some(T::Id(_)) = toks.get(p) {
        p += 1;
    }
    if toks.get(p) != Some(&T::LBrace) {
        return Err("expected {".into());
    }
    p += 1;
    let attr_list = |p: &mut usize| -> Result<(), String> {
        while toks.get(*p) == Some(&T::LBracket) {
            *p += 1;
            while let Some(T::Id(_)) = toks.get(*p) {
                *p += 1;
                if toks.get(*p) != Some(&T::Eq) {
                    return Err("expected = in attribute".into());
                }
                *p += 1;
                match toks.get(*p) {
                    Some(T::Id(_)) => *p += 1,
                    _ => return Err("expected attribute value".into()),
                }
                if matches!(toks.get(*p), Some(T::Comma) | Some(T::Semi)) {
                    *p += 1;
                }
            }
            if toks.get(*p) != Some(&T::RBracket) {
                return Err("expected ]".into());
            }
            *p += 1;
        }
        Ok(())
    };
    loop {
        match toks.get(p) {
            Some(T::RBrace) => {
                p += 1;
                break;
            }
            Some(T::Id(_)) => {
                p += 1;
                if toks.get(p) == Some(&T::Eq) {
                    p += 1;
                    match toks.get(p) {
                        Some(T::Id(_)) => p += 1,
                        _ => return Err("expected value".into()),
                    }
                } else {
                    while let Some(T::Edge(e)) = toks.get(p) {
                        if *e != op {
                            return Err(format!("edge operator {e} in a graph using {op}"));
                        }
                        p += 1;
                        match toks.get(p) {
                            Some(T::Id(_)) => p += 1,
                            _ => return Err("expected edge target".into()),
                        }
                    }
                    attr_list(&mut p)?;
                }
                if toks.get(p) == Some(&T::Semi) {
                    p += 1;
                }
            }
            other => return Err(format!("unexpected token {other:?}")),
        }
    }
    if p != toks.len() {
        return Err("trailing input after graph".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Misc

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn mode_char(m: Mode) -> char {
    match m {
        Mode::R => 'R',
        Mode::W => 'W',
    }
}
