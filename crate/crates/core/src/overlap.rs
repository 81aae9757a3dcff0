//! Candidate matching by set overlap with an inverted index, and the
//! round-based overlap alignment that alternates matching with enrichment
//! and weight propagation.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Label, NodeId, Origin, TripleGraph};
use crate::partition::{unaligned, Color, ColorInterner};
use crate::refine::hybrid_partition;
use crate::weighted::{enrich, propagate, CandidateMatchGraph, EnrichError, Weight, WeightedError, WeightedPartition};

/// An element of a node's characteristic set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CharObject {
    Token(Box<str>),
    Edge(Color, Color),
}

/// How many of a node's rarest objects are probed in the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PrefixMode {
    /// `⌈k·θ⌉` objects.
    #[default]
    Paper,
    /// `k − ⌈k·θ⌉ + 1` objects, which cannot miss a pair with overlap ≥ θ.
    Safe,
}

/// How literal text is cut into objects for candidate search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LiteralTokens {
    /// Lowercased words.
    #[default]
    Words,
    /// Lowercased characters.
    Chars,
}

#[derive(Debug, Error)]
pub enum OverlapError {
    #[error("node {0} is not a literal")]
    NotLiteral(NodeId),
    #[error("node {0} is a literal")]
    Literal(NodeId),
    #[error("threshold {0} is outside [0, 1]")]
    Threshold(f64),
    #[error(transparent)]
    Enrich(#[from] EnrichError),
    #[error(transparent)]
    Weights(#[from] WeightedError),
}

/// Jaccard overlap of two sorted, duplicate-free slices; 1 for two empty sets.
pub fn overlap<T: Ord>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    common as f64 / (a.len() + b.len() - common) as f64
}

pub fn diff<T: Ord>(a: &[T], b: &[T]) -> f64 {
    1.0 - overlap(a, b)
}

/// Lowercased words of `text`, split at anything that is not alphanumeric.
pub fn split(text: &str) -> Vec<CharObject> {
    let mut words: Vec<CharObject> = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| CharObject::Token(w.to_lowercase().into_boxed_str()))
        .collect();
    words.sort_unstable();
    words.dedup();
    words
}

/// Distinct lowercased characters of `text`.
pub fn chars(text: &str) -> Vec<CharObject> {
    let mut out: Vec<CharObject> = text
        .to_lowercase()
        .chars()
        .map(|c| CharObject::Token(c.to_string().into_boxed_str()))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub fn literal_objects(text: &str, tokens: LiteralTokens) -> Vec<CharObject> {
    match tokens {
        LiteralTokens::Words => split(text),
        LiteralTokens::Chars => chars(text),
    }
}

/// Levenshtein distance over characters divided by the longer length.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let len = a.chars().count().max(b.chars().count());
    if len == 0 {
        return 0.0;
    }
    strsim::levenshtein(a, b) as f64 / len as f64
}

pub fn sigma_literals(g: &TripleGraph, n: NodeId, m: NodeId) -> Result<Weight, OverlapError> {
    match (g.label(n), g.label(m)) {
        (Label::Literal(a), Label::Literal(b)) => {
            Ok(Weight::saturating(normalized_levenshtein(&a.lexical, &b.lexical)))
        }
        (Label::Literal(_), _) => Err(OverlapError::NotLiteral(m)),
        _ => Err(OverlapError::NotLiteral(n)),
    }
}

/// Distinct `(predicate color, object color)` pairs of the out-edges of `n`.
pub fn out_color(xi: &WeightedPartition, g: &TripleGraph, n: NodeId) -> Vec<CharObject> {
    let p = &xi.partition;
    let mut out: Vec<CharObject> =
        g.out_slice(n).iter().map(|&(a, b)| CharObject::Edge(p.color(a), p.color(b))).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Distance between two non-literal nodes from a positional matching of
/// their out-edges within equal edge colors.
pub fn sigma_nl(xi: &WeightedPartition, g: &TripleGraph, n: NodeId, m: NodeId) -> Result<Weight, OverlapError> {
    for x in [n, m] {
        if g.is_literal(x) {
            return Err(OverlapError::Literal(x));
        }
    }
    let groups = |x: NodeId| {
        let mut by: FxHashMap<(Color, Color), Vec<f64>> = FxHashMap::default();
        for &(p, o) in g.out_slice(x) {
            let key = (xi.partition.color(p), xi.partition.color(o));
            by.entry(key).or_default().push(xi.weight(p).oplus(xi.weight(o)).get());
        }
        for v in by.values_mut() {
            v.sort_by(f64::total_cmp);
        }
        by
    };
    let (gn, gm) = (groups(n), groups(m));
    let f = gn.len().max(gm.len());
    if f == 0 {
        return Ok(Weight::ZERO);
    }
    let f = f as f64;
    let mut keys: Vec<&(Color, Color)> = gn.keys().chain(gm.keys()).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut total = Weight::ZERO;
    let mut residual = 0usize;
    let empty = Vec::new();
    for k in keys {
        let a = gn.get(k).unwrap_or(&empty);
        let b = gm.get(k).unwrap_or(&empty);
        for (x, y) in a.iter().zip(b) {
            total = total.oplus(Weight::saturating((x + y).min(1.0) / f));
        }
        residual += a.len().abs_diff(b.len());
    }
    Ok(total.oplus(Weight::saturating(residual as f64 / f)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchConfig {
    /// Distance threshold: emitted pairs have distance strictly below it.
    pub theta: f64,
    /// Overlap threshold for candidates.
    pub similarity: f64,
    pub prefix: PrefixMode,
}

impl MatchConfig {
    pub fn new(theta: f64) -> Self {
        MatchConfig { theta, similarity: theta, prefix: PrefixMode::Paper }
    }

    pub fn probe_len(&self, k: usize) -> usize {
        let need = ((k as f64) * self.similarity - 1e-9).ceil().max(0.0) as usize;
        let len = match self.prefix {
            PrefixMode::Paper => need,
            PrefixMode::Safe => (k + 1).saturating_sub(need),
        };
        len.min(k)
    }
}

/// Finds pairs `(n, m)` in `a × b` whose object sets overlap by at least
/// the similarity threshold and whose distance is below `theta`.
pub fn overlap_match<C, S>(a: &[NodeId], b: &[NodeId], cfg: &MatchConfig, chars: C, sigma: S) -> CandidateMatchGraph
where
    C: Fn(NodeId) -> Vec<CharObject> + Sync,
    S: Fn(NodeId, NodeId) -> Weight + Sync,
{
    if a.is_empty() || b.is_empty() {
        return CandidateMatchGraph::default();
    }
    let a_objs: Vec<Vec<CharObject>> = a.par_iter().map(|&n| chars(n)).collect();
    let b_objs: Vec<Vec<CharObject>> = b.par_iter().map(|&m| chars(m)).collect();
    // Dense ids in object order, so ties in frequency break as they would on the objects.
    let mut distinct: Vec<&CharObject> = a_objs.iter().chain(&b_objs).flatten().collect();
    distinct.par_sort_unstable();
    distinct.dedup();
    let ids: FxHashMap<&CharObject, u32> = distinct.iter().enumerate().map(|(k, &o)| (o, k as u32)).collect();
    let encode = |objs: &[CharObject]| -> Vec<u32> {
        let mut v: Vec<u32> = objs.iter().map(|o| ids[o]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let a_ids: Vec<Vec<u32>> = a_objs.par_iter().map(|o| encode(o)).collect();
    let b_ids: Vec<Vec<u32>> = b_objs.par_iter().map(|o| encode(o)).collect();
    let mut postings: Vec<Vec<u32>> = vec![Vec::new(); distinct.len()];
    for (j, objs) in b_ids.iter().enumerate() {
        for &o in objs {
            postings[o as usize].push(j as u32);
        }
    }
    let edges: Vec<(NodeId, NodeId, Weight)> = a_ids
        .par_iter()
        .enumerate()
        .map_init(
            || (vec![0u32; b.len()], Vec::new()),
            |(count, touched), (i, mine)| {
                let n = a[i];
                let probe = cfg.probe_len(mine.len());
                let mut rare = mine.clone();
                rare.sort_by_key(|&o| (postings[o as usize].len(), o));
                for &o in &rare[..probe] {
                    for &j in &postings[o as usize] {
                        if count[j as usize] == 0 {
                            count[j as usize] = 1;
                            touched.push(j);
                        }
                        count[j as usize] += 1;
                    }
                }
                // Counts start at 1, so they end one above the probed intersection.
                let rest = &rare[probe..];
                let jaccard = |common: usize, other: usize| common as f64 / (mine.len() + other - common) as f64;
                let mut found = Vec::new();
                for &j in touched.iter() {
                    let mut common = (count[j as usize] - 1) as usize;
                    count[j as usize] = 0;
                    let theirs = &b_ids[j as usize];
                    if jaccard((common + rest.len()).min(theirs.len()), theirs.len()) < cfg.similarity {
                        continue;
                    }
                    common += rest.iter().filter(|o| theirs.binary_search(o).is_ok()).count();
                    if jaccard(common, theirs.len()) >= cfg.similarity {
                        let m = b[j as usize];
                        let d = sigma(n, m);
                        if d.get() < cfg.theta {
                            found.push((n, m, d));
                        }
                    }
                }
                touched.clear();
                found
            },
        )
        .flatten()
        .collect();
    CandidateMatchGraph::new(edges)
}

/// Reference implementation of `overlap_match` that tests every pair.
pub fn exhaustive_match<C, S>(a: &[NodeId], b: &[NodeId], cfg: &MatchConfig, chars: C, sigma: S) -> CandidateMatchGraph
where
    C: Fn(NodeId) -> Vec<CharObject>,
    S: Fn(NodeId, NodeId) -> Weight,
{
    let b_chars: Vec<_> = b.iter().map(|&m| chars(m)).collect();
    let mut edges = Vec::new();
    for &n in a {
        let mine = chars(n);
        for (j, &m) in b.iter().enumerate() {
            if overlap(&mine, &b_chars[j]) >= cfg.similarity {
                let d = sigma(n, m);
                if d.get() < cfg.theta {
                    edges.push((n, m, d));
                }
            }
        }
    }
    CandidateMatchGraph::new(edges)
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapConfig {
    pub matching: MatchConfig,
    pub epsilon: f64,
    pub tokens: LiteralTokens,
    pub max_rounds: usize,
    pub max_weight_iterations: usize,
}

impl Default for OverlapConfig {
    fn default() -> Self {
        OverlapConfig {
            matching: MatchConfig::new(0.65),
            epsilon: 1e-3,
            tokens: LiteralTokens::Words,
            max_rounds: 100,
            max_weight_iterations: 1000,
        }
    }
}

impl OverlapConfig {
    pub fn with_theta(theta: f64) -> Self {
        OverlapConfig { matching: MatchConfig::new(theta), ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct OverlapOutcome {
    pub xi: WeightedPartition,
    /// Number of enrich-and-propagate rounds run.
    pub rounds: usize,
    /// Candidate edges found in each matching pass, starting with literals.
    pub matches: Vec<usize>,
    pub hit_round_cap: bool,
}

fn unaligned_split(xi: &WeightedPartition, g: &TripleGraph, origin: Origin, literals: bool) -> Vec<NodeId> {
    unaligned(&xi.partition, g, origin).into_iter().filter(|&n| g.is_literal(n) == literals).collect()
}

/// Round-based overlap alignment seeded with the hybrid partition.
pub fn overlap_partition(
    g: &TripleGraph,
    cfg: &OverlapConfig,
    interner: &ColorInterner,
) -> Result<OverlapOutcome, OverlapError> {
    for t in [cfg.matching.theta, cfg.matching.similarity] {
        if !(0.0..=1.0).contains(&t) {
            return Err(OverlapError::Threshold(t));
        }
    }
    let mut xi = WeightedPartition::exact(hybrid_partition(g, interner));
    let a = unaligned_split(&xi, g, Origin::Source, true);
    let b = unaligned_split(&xi, g, Origin::Target, true);
    let text = |n: NodeId| match g.label(n) {
        Label::Literal(l) => literal_objects(&l.lexical, cfg.tokens),
        _ => Vec::new(),
    };
    let mut h = overlap_match(&a, &b, &cfg.matching, text, |n, m| {
        sigma_literals(g, n, m).unwrap_or(Weight::ONE)
    });
    let mut matches = vec![h.len()];
    let mut rounds = 0;
    let mut hit_round_cap = false;
    loop {
        if rounds >= cfg.max_rounds {
            hit_round_cap = true;
            break;
        }
        rounds += 1;
        let enriched = enrich(&xi, g, &h, interner)?;
        xi = propagate(&enriched, g, cfg.epsilon, cfg.max_weight_iterations, interner)?.xi;
        let a = unaligned_split(&xi, g, Origin::Source, false);
        let b = unaligned_split(&xi, g, Origin::Target, false);
        let current = &xi;
        h = overlap_match(&a, &b, &cfg.matching, |n| out_color(current, g, n), |n, m| {
            sigma_nl(current, g, n, m).unwrap_or(Weight::ONE)
        });
        matches.push(h.len());
        if h.is_empty() {
            break;
        }
    }
    Ok(OverlapOutcome { xi, rounds, matches, hit_round_cap })
}
