//! Scoring alignments against ground truth.

use std::io::BufRead;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use thiserror::Error;

use crate::keys::{key_index, node_keys};
use crate::model::{NodeId, Origin, TripleGraph};
use crate::overlap::{overlap_partition, OverlapConfig, OverlapError};
use crate::partition::ColorInterner;
use crate::weighted::align_theta;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("ground truth maps source key {0} twice")]
    NotFunctional(String),
    #[error("key {0} does not name a node of the {1} version")]
    Unresolved(String, &'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Overlap(#[from] OverlapError),
}

/// Expected `(source key, target key)` pairs; each source key at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub pairs: Vec<(String, String)>,
}

impl GroundTruth {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self, EvalError> {
        let mut seen = FxHashSet::default();
        for (s, _) in &pairs {
            if !seen.insert(s.as_str()) {
                return Err(EvalError::NotFunctional(s.clone()));
            }
        }
        Ok(GroundTruth { pairs })
    }

    /// Reads `src<TAB>tgt` lines; blank lines and `#` comments are skipped.
    pub fn read<R: BufRead>(r: R) -> Result<Self, EvalError> {
        let mut pairs = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(s), Some(t), None) if !s.is_empty() && !t.is_empty() => {
                    pairs.push((s.to_string(), t.to_string()))
                }
                _ => {
                    return Err(EvalError::Format { line: i + 1, message: "expected two tab-separated keys".into() })
                }
            }
        }
        Self::new(pairs)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, t) in &self.pairs {
            out.push_str(s);
            out.push('\t');
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    /// Maps keys to nodes of the combined graph `g`.
    pub fn resolve(&self, g: &TripleGraph) -> Result<Vec<(NodeId, NodeId)>, EvalError> {
        let keys = node_keys(g);
        let src = key_index(g, &keys, Origin::Source);
        let tgt = key_index(g, &keys, Origin::Target);
        self.pairs
            .iter()
            .map(|(s, t)| {
                let a = *src.get(s).ok_or_else(|| EvalError::Unresolved(s.clone(), "source"))?;
                let b = *tgt.get(t).ok_or_else(|| EvalError::Unresolved(t.clone(), "target"))?;
                Ok((a, b))
            })
            .collect()
    }
}

/// Nodes of one version sorted into the four precision categories.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SideReport {
    pub exact: Vec<NodeId>,
    pub inclusive: Vec<NodeId>,
    pub missing: Vec<NodeId>,
    #[serde(rename = "false")]
    pub false_matches: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub exact: usize,
    pub inclusive: usize,
    pub missing: usize,
    #[serde(rename = "false")]
    pub false_matches: usize,
}

impl SideReport {
    pub fn counts(&self) -> Counts {
        Counts {
            exact: self.exact.len(),
            inclusive: self.inclusive.len(),
            missing: self.missing.len(),
            false_matches: self.false_matches.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionReport {
    pub source: SideReport,
    pub target: SideReport,
    pub aligned_edge_ratio: f64,
}

/// Classifies every node that occurs in the alignment or the truth:
/// exact when aligned to precisely its truth partner, inclusive when
/// aligned to its partner and others, missing when its partner is absent,
/// false when aligned although the truth has no partner. Only nodes
/// accepted by `keep` are considered.
pub fn evaluate_side(
    alignment: &[(NodeId, NodeId)],
    truth: &[(NodeId, NodeId)],
    keep: impl Fn(NodeId) -> bool,
) -> SideReport {
    let mut aligned: FxHashMap<NodeId, Vec<NodeId>> = FxHashMap::default();
    for &(a, b) in alignment {
        if keep(a) && keep(b) {
            aligned.entry(a).or_default().push(b);
        }
    }
    let expected: FxHashMap<NodeId, NodeId> =
        truth.iter().copied().filter(|&(a, b)| keep(a) && keep(b)).collect();
    let mut nodes: Vec<NodeId> = aligned.keys().chain(expected.keys()).copied().collect();
    nodes.sort_unstable();
    nodes.dedup();
    let mut r = SideReport::default();
    for n in nodes {
        let set = aligned.get(&n);
        match expected.get(&n) {
            Some(t) => match set {
                Some(s) if s.contains(t) && s.len() == 1 => r.exact.push(n),
                Some(s) if s.contains(t) => r.inclusive.push(n),
                _ => r.missing.push(n),
            },
            None => r.false_matches.push(n),
        }
    }
    r
}

/// Both sides of the evaluation over URI and blank nodes.
pub fn evaluate(g: &TripleGraph, alignment: &[(NodeId, NodeId)], truth: &[(NodeId, NodeId)]) -> PrecisionReport {
    let keep = |n: NodeId| !g.is_literal(n);
    let source = evaluate_side(alignment, truth, keep);
    let flip = |v: &[(NodeId, NodeId)]| v.iter().map(|&(a, b)| (b, a)).collect::<Vec<_>>();
    let target = evaluate_side(&flip(alignment), &flip(truth), keep);
    PrecisionReport { source, target, aligned_edge_ratio: aligned_edge_ratio(g, alignment) }
}

/// Share of edges that have an aligned counterpart in the other version.
///
/// A source edge `(s, p, o)` is aligned when some target edge `(s', p', o')`
/// has `(s, s')`, `(p, p')` and `(o, o')` all aligned, and symmetrically for
/// target edges. A source and a target edge spelled with the same URIs and
/// literals count once, both in the total and, when aligned, among the
/// aligned edges. Adding pairs to the alignment never lowers the ratio.
pub fn aligned_edge_ratio(g: &TripleGraph, alignment: &[(NodeId, NodeId)]) -> f64 {
    let pairs: FxHashSet<(NodeId, NodeId)> = alignment.iter().copied().collect();
    let mut fwd: FxHashMap<NodeId, Vec<NodeId>> = FxHashMap::default();
    let mut back: FxHashMap<NodeId, Vec<NodeId>> = FxHashMap::default();
    for &(a, b) in alignment {
        fwd.entry(a).or_default().push(b);
        back.entry(b).or_default().push(a);
    }
    let empty = Vec::new();
    let has_match = |s: NodeId, p: NodeId, o: NodeId, partners: &FxHashMap<NodeId, Vec<NodeId>>, src_side: bool| {
        partners.get(&s).unwrap_or(&empty).iter().any(|&s2| {
            g.out_slice(s2).iter().any(|&(p2, o2)| {
                let ok = |x: NodeId, y: NodeId| if src_side { pairs.contains(&(x, y)) } else { pairs.contains(&(y, x)) };
                ok(p, p2) && ok(o, o2)
            })
        })
    };
    let mut aligned_flags: Vec<bool> = Vec::with_capacity(g.triple_count());
    for t in g.triples() {
        let src_side = g.origin(t.subject) == Origin::Source;
        let partners = if src_side { &fwd } else { &back };
        aligned_flags.push(has_match(t.subject, t.predicate, t.object, partners, src_side));
    }
    // Edges whose three labels are identical in both versions and contain no blanks.
    let mut by_labels: FxHashMap<[&crate::model::Label; 3], usize> = FxHashMap::default();
    for (i, t) in g.triples().iter().enumerate() {
        if g.origin(t.subject) == Origin::Source && ![t.subject, t.predicate, t.object].iter().any(|&n| g.is_blank(n)) {
            by_labels.insert([g.label(t.subject), g.label(t.predicate), g.label(t.object)], i);
        }
    }
    let mut total = g.triple_count();
    let mut aligned: usize = aligned_flags.iter().filter(|&&f| f).count();
    for (i, t) in g.triples().iter().enumerate() {
        if g.origin(t.subject) != Origin::Target {
            continue;
        }
        if let Some(&j) = by_labels.get(&[g.label(t.subject), g.label(t.predicate), g.label(t.object)]) {
            total -= 1;
            if aligned_flags[i] && aligned_flags[j] {
                aligned -= 1;
            }
        }
    }
    if total == 0 {
        return 1.0;
    }
    aligned as f64 / total as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub rounds: usize,
    pub report: PrecisionReport,
}

/// Runs the overlap alignment at every threshold and scores each result.
/// The weighted alignment at `θ` keeps equal-colored pairs at distance
/// strictly below `θ`.
pub fn threshold_sweep(
    g: &TripleGraph,
    truth: &[(NodeId, NodeId)],
    thetas: &[f64],
    base: &OverlapConfig,
) -> Result<Vec<SweepPoint>, EvalError> {
    let mut out = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let mut cfg = base.clone();
        cfg.matching.theta = theta;
        cfg.matching.similarity = theta;
        let interner = ColorInterner::new();
        let outcome = overlap_partition(g, &cfg, &interner)?;
        let pairs: Vec<(NodeId, NodeId)> =
            align_theta(&outcome.xi, g, theta).into_iter().map(|(a, b, _)| (a, b)).collect();
        out.push(SweepPoint { theta, rounds: outcome.rounds, report: evaluate(g, &pairs, truth) });
    }
    Ok(out)
}

/// Index of the sweep point with the most exact source-side matches; the
/// first one wins ties.
pub fn best_theta(points: &[SweepPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if best.map_or(true, |b| p.report.source.exact.len() > points[b].report.source.exact.len()) {
            best = Some(i);
        }
    }
    best
}
