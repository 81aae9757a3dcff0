//! Weighted partitions: a coloring plus a per-node weight in `[0, 1]`.
//! Two nodes of the same color are at distance `w(n) ⊕ w(m)`, where
//! `x ⊕ y = min(x + y, 1)`; nodes of different colors are at distance 1.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::model::{NodeId, Origin, TripleGraph};
use crate::partition::{align, ColorInterner, Partition};
use crate::refine::{blank_like, blank_out, RefineIter, Scope};

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("weight {0} is outside [0, 1]")]
    OutOfRange(f64),
}

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize)]
#[serde(transparent)]
pub struct Weight(f64);

impl Weight {
    pub const ZERO: Weight = Weight(0.0);
    pub const ONE: Weight = Weight(1.0);

    pub fn new(x: f64) -> Result<Self, WeightError> {
        if (0.0..=1.0).contains(&x) {
            Ok(Weight(x))
        } else {
            Err(WeightError::OutOfRange(x))
        }
    }

    /// Clamps into range; NaN maps to 1.
    pub fn saturating(x: f64) -> Self {
        if x.is_nan() {
            Weight::ONE
        } else {
            Weight(x.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn oplus(self, other: Weight) -> Weight {
        Weight((self.0 + other.0).min(1.0))
    }
}

impl std::fmt::Display for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `x ⊕ y` on raw values, rejecting inputs outside `[0, 1]`.
pub fn oplus(x: f64, y: f64) -> Result<f64, WeightError> {
    Ok(Weight::new(x)?.oplus(Weight::new(y)?).get())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPartition {
    pub partition: Partition,
    pub weights: Vec<Weight>,
}

impl WeightedPartition {
    /// `p` with every weight zero.
    pub fn exact(p: Partition) -> Self {
        let weights = vec![Weight::ZERO; p.len()];
        WeightedPartition { partition: p, weights }
    }

    #[inline]
    pub fn weight(&self, n: NodeId) -> Weight {
        self.weights[n.index()]
    }

    #[inline]
    pub fn sigma(&self, n: NodeId, m: NodeId) -> Weight {
        if self.partition.color(n) == self.partition.color(m) {
            self.weight(n).oplus(self.weight(m))
        } else {
            Weight::ONE
        }
    }
}

/// Pairs at distance strictly below `theta`, sorted.
pub fn align_theta(xi: &WeightedPartition, g: &TripleGraph, theta: f64) -> Vec<(NodeId, NodeId, Weight)> {
    align(&xi.partition, g)
        .into_iter()
        .map(|(a, b)| (a, b, xi.sigma(a, b)))
        .filter(|&(_, _, s)| s.get() < theta)
        .collect()
}

/// Weighted bipartite edges between unaligned source and target nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateMatchGraph {
    pub edges: Vec<(NodeId, NodeId, Weight)>,
}

impl CandidateMatchGraph {
    pub fn new(mut edges: Vec<(NodeId, NodeId, Weight)>) -> Self {
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        CandidateMatchGraph { edges }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EnrichError {
    #[error("candidate edge ({0}, {1}) does not run from the source to the target version")]
    WrongSide(NodeId, NodeId),
}

#[derive(Debug, Error, PartialEq)]
pub enum WeightedError {
    #[error("weights did not converge within {0} iterations")]
    NoConvergence(usize),
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merges each connected component of `h` into one fresh color. A node's
/// weight becomes half of its largest shortest-path distance (under ⊕) to
/// a node of the other version in the same component.
pub fn enrich(
    xi: &WeightedPartition,
    g: &TripleGraph,
    h: &CandidateMatchGraph,
    interner: &ColorInterner,
) -> Result<WeightedPartition, EnrichError> {
    for &(a, b, _) in &h.edges {
        if g.origin(a) != Origin::Source || g.origin(b) != Origin::Target {
            return Err(EnrichError::WrongSide(a, b));
        }
    }
    let mut out = xi.clone();
    if h.is_empty() {
        return Ok(out);
    }
    let mut local: FxHashMap<NodeId, usize> = FxHashMap::default();
    let mut nodes: Vec<NodeId> = Vec::new();
    for &(a, b, _) in &h.edges {
        for n in [a, b] {
            local.entry(n).or_insert_with(|| {
                nodes.push(n);
                nodes.len() - 1
            });
        }
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    for &(a, b, w) in &h.edges {
        let (x, y) = (local[&a], local[&b]);
        adj[x].push((y, w.get()));
        adj[y].push((x, w.get()));
        let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
        if rx != ry {
            parent[rx.max(ry)] = rx.min(ry);
        }
    }
    let roots: Vec<usize> = (0..nodes.len()).map(|x| find(&mut parent, x)).collect();
    let mut color_of_root: FxHashMap<usize, crate::partition::Color> = FxHashMap::default();
    for &r in &roots {
        color_of_root.entry(r).or_insert_with(|| interner.fresh_component());
    }
    // Members of each component, and each node's position among them.
    let mut members: FxHashMap<usize, Vec<usize>> = FxHashMap::default();
    let mut slot = vec![0usize; nodes.len()];
    for x in 0..nodes.len() {
        let m = members.entry(roots[x]).or_default();
        slot[x] = m.len();
        m.push(x);
    }
    let weights: Vec<f64> = (0..nodes.len())
        .into_par_iter()
        .map(|x| {
            let comp = &members[&roots[x]];
            let dist = dijkstra(&adj, comp, &slot, slot[x]);
            let side = g.origin(nodes[x]);
            let far = comp
                .iter()
                .zip(&dist)
                .filter(|&(&y, _)| g.origin(nodes[y]) != side)
                .map(|(_, &d)| d)
                .fold(0.0f64, f64::max);
            far / 2.0
        })
        .collect();
    for (x, &n) in nodes.iter().enumerate() {
        out.partition.set(n, color_of_root[&roots[x]]);
        out.weights[n.index()] = Weight::saturating(weights[x]);
    }
    Ok(out)
}

// Path lengths combine with ⊕, so they are ordinary sums capped at 1.
// Distances are indexed by position within the component `comp`.
fn dijkstra(adj: &[Vec<(usize, f64)>], comp: &[usize], slot: &[usize], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; comp.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((OrdF64(0.0), src)));
    while let Some(Reverse((OrdF64(d), x))) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for &(y, w) in &adj[comp[x]] {
            let y = slot[y];
            let nd = (d + w).min(1.0);
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Reverse((OrdF64(nd), y)));
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Mean over out-edges of `w(p) ⊕ w(o)`; nodes without out-edges keep
/// their weight.
pub fn reweight(xi: &WeightedPartition, g: &TripleGraph, n: NodeId) -> Weight {
    reweight_with(&xi.weights, g, n)
}

fn reweight_with(weights: &[Weight], g: &TripleGraph, n: NodeId) -> Weight {
    let out = g.out_slice(n);
    if out.is_empty() {
        return weights[n.index()];
    }
    let k = out.len() as f64;
    out.iter().fold(Weight::ZERO, |acc, &(p, o)| {
        acc.oplus(Weight(weights[p.index()].oplus(weights[o.index()]).get() / k))
    })
}

#[derive(Debug, Clone)]
pub struct WeightedRefinement {
    pub xi: WeightedPartition,
    pub color_steps: usize,
    pub weight_steps: usize,
}

/// Refines colors of `scope` to their fixpoint, then iterates the weights
/// of `scope` until the largest change drops below `epsilon`.
pub fn weighted_refine_fixpoint(
    xi: &WeightedPartition,
    g: &TripleGraph,
    scope: &Scope,
    epsilon: f64,
    max_iterations: usize,
    interner: &ColorInterner,
) -> Result<WeightedRefinement, WeightedError> {
    let mut it = RefineIter::new(&xi.partition, g, scope);
    while !it.step(interner) {}
    let color_steps = it.steps;
    let partition = it.current;

    let nodes: Vec<NodeId> = scope.iter().collect();
    let mut weights = xi.weights.clone();
    let mut weight_steps = 0;
    loop {
        if weight_steps >= max_iterations {
            return Err(WeightedError::NoConvergence(max_iterations));
        }
        weight_steps += 1;
        let next: Vec<Weight> = nodes.par_iter().map(|&n| reweight_with(&weights, g, n)).collect();
        let mut delta = 0.0f64;
        for (&n, w) in nodes.iter().zip(next) {
            delta = delta.max((w.get() - weights[n.index()].get()).abs());
            weights[n.index()] = w;
        }
        if delta < epsilon {
            break;
        }
    }
    Ok(WeightedRefinement { xi: WeightedPartition { partition, weights }, color_steps, weight_steps })
}

/// Blanks the unaligned non-literal nodes, zeroes their weights and refines.
pub fn propagate(
    xi: &WeightedPartition,
    g: &TripleGraph,
    epsilon: f64,
    max_iterations: usize,
    interner: &ColorInterner,
) -> Result<WeightedRefinement, WeightedError> {
    let scope = blank_like(&xi.partition, g, |n| xi.weight(n) == Weight::ZERO);
    let mut start = WeightedPartition { partition: blank_out(&xi.partition, &scope, interner), weights: xi.weights.clone() };
    for n in scope.iter() {
        start.weights[n.index()] = Weight::ZERO;
    }
    weighted_refine_fixpoint(&start, g, &scope, epsilon, max_iterations, interner)
}
