//! Bisimulation-style refinement of partitions and the partitions built on
//! it: full bisimulation, `Deblank` and `Hybrid`.
//!
//! A refinement step recolors every node in scope with its starting color
//! paired with the set of `(predicate, object)` colors of its out-edges.
//! Iterating from the same starting colors gives each node a color that
//! describes its unfolded out-tree up to the current depth. Once a node's
//! tree is finite and fully explored it is *complete* and its color stops
//! changing. The fixpoint is reached when a step neither changes the
//! induced equivalence nor completes another node.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::model::{Label, NodeId, TripleGraph};
use crate::partition::{equivalent, label_partition, unaligned_all, Color, ColorDesc, ColorInterner, Partition};

/// A set of nodes, stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    bits: FixedBitSet,
}

impl Scope {
    pub fn empty(n: usize) -> Self {
        Scope { bits: FixedBitSet::with_capacity(n) }
    }

    pub fn all(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        Scope { bits }
    }

    pub fn from_nodes(n: usize, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut s = Self::empty(n);
        for x in nodes {
            s.insert(x);
        }
        s
    }

    pub fn blanks(g: &TripleGraph) -> Self {
        Self::from_nodes(g.node_count(), g.nodes().filter(|&n| g.is_blank(n)))
    }

    pub fn insert(&mut self, n: NodeId) {
        self.bits.insert(n.index());
    }

    #[inline]
    pub fn contains(&self, n: NodeId) -> bool {
        self.bits.contains(n.index())
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.bits.ones().map(|i| NodeId(i as u32))
    }
}

fn signature(base: Color, current: &Partition, g: &TripleGraph, n: NodeId) -> ColorDesc {
    let mut pairs: Vec<(Color, Color)> =
        g.out_slice(n).iter().map(|&(p, o)| (current.color(p), current.color(o))).collect();
    pairs.sort_unstable();
    pairs.dedup();
    ColorDesc::Pair(base, pairs.into_boxed_slice())
}

/// The color `n` receives in one refinement step of `p`.
pub fn recolor(p: &Partition, g: &TripleGraph, n: NodeId, interner: &ColorInterner) -> Color {
    interner.intern(signature(p.color(n), p, g, n))
}

/// One refinement step: nodes in scope are recolored, others keep their color.
///
/// A new color that happens to equal the color of a node outside the scope
/// is shifted until it is unused there, so the result is always finer than `p`.
pub fn refine_step(p: &Partition, g: &TripleGraph, scope: &Scope, interner: &ColorInterner) -> Partition {
    let nodes: Vec<NodeId> = scope.iter().collect();
    let descs: Vec<ColorDesc> = nodes.par_iter().map(|&n| signature(p.color(n), p, g, n)).collect();
    let colors = interner.intern_batch(descs);
    let outside: FxHashSet<Color> = g.nodes().filter(|&n| !scope.contains(n)).map(|n| p.color(n)).collect();
    let mut next = p.clone();
    for (n, mut c) in nodes.into_iter().zip(colors) {
        while outside.contains(&c) {
            c = interner.intern(ColorDesc::Shift(c));
        }
        next.set(n, c);
    }
    next
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub partition: Partition,
    pub steps: usize,
}

/// Runs refinement steps from `p` until the fixpoint.
pub fn refine_fixpoint(p: &Partition, g: &TripleGraph, scope: &Scope, interner: &ColorInterner) -> Refinement {
    let mut iter = RefineIter::new(p, g, scope);
    loop {
        if iter.step(interner) {
            return Refinement { partition: iter.current, steps: iter.steps };
        }
    }
}

/// Step-wise driver for `refine_fixpoint`, reused by the weighted variant.
pub(crate) struct RefineIter<'a> {
    base: &'a Partition,
    g: &'a TripleGraph,
    scope: &'a Scope,
    pub(crate) current: Partition,
    complete: Vec<bool>,
    done: usize,
    pub(crate) steps: usize,
}

impl<'a> RefineIter<'a> {
    pub(crate) fn new(base: &'a Partition, g: &'a TripleGraph, scope: &'a Scope) -> Self {
        let complete: Vec<bool> = g.nodes().map(|n| !scope.contains(n)).collect();
        let done = complete.iter().filter(|&&c| c).count();
        RefineIter { base, g, scope, current: base.clone(), complete, done, steps: 0 }
    }

    /// Advances one step; returns true once the fixpoint is reached.
    pub(crate) fn step(&mut self, interner: &ColorInterner) -> bool {
        let g = self.g;
        let complete = &self.complete;
        let pending: Vec<NodeId> = self.scope.iter().filter(|n| !complete[n.index()]).collect();
        let next_complete: Vec<bool> = pending
            .par_iter()
            .map(|&n| g.out_slice(n).iter().all(|&(p, o)| complete[p.index()] && complete[o.index()]))
            .collect();
        let current = &self.current;
        let base = self.base;
        let descs: Vec<ColorDesc> =
            pending.par_iter().map(|&n| signature(base.color(n), current, g, n)).collect();
        let colors = interner.intern_batch(descs);
        let mut next = self.current.clone();
        for (&n, c) in pending.iter().zip(colors) {
            next.set(n, c);
        }
        self.steps += 1;
        let mut newly = 0;
        for (&n, c) in pending.iter().zip(next_complete) {
            if c {
                self.complete[n.index()] = true;
                newly += 1;
            }
        }
        self.done += newly;
        let stable = newly == 0 && equivalent(&self.current, &next);
        self.current = next;
        stable
    }
}

/// Coarsest bisimulation of `g`.
pub fn bisim_partition(g: &TripleGraph, interner: &ColorInterner) -> Partition {
    let start = label_partition(g, interner);
    refine_fixpoint(&start, g, &Scope::all(g.node_count()), interner).partition
}

/// URIs and literals by label; blank nodes by their bisimulation class.
pub fn deblank_partition(g: &TripleGraph, interner: &ColorInterner) -> Partition {
    let start = label_partition(g, interner);
    refine_fixpoint(&start, g, &Scope::blanks(g), interner).partition
}

/// Gives every node in `scope` the shared blank color.
pub fn blank_out(p: &Partition, scope: &Scope, interner: &ColorInterner) -> Partition {
    let blank = interner.blank();
    let mut out = p.clone();
    for n in scope.iter() {
        out.set(n, blank);
    }
    out
}

/// Unaligned nodes of `p` that are not literals.
pub fn unaligned_nonliterals(p: &Partition, g: &TripleGraph) -> Scope {
    Scope::from_nodes(g.node_count(), unaligned_all(p, g).into_iter().filter(|&n| !g.is_literal(n)))
}

/// Unaligned non-literals of `p`, plus the blank nodes of classes that hold
/// only blank nodes and pass `exact`.
///
/// Refining those blanks again makes the result independent of whether the
/// starting partition had already grouped them.
pub fn blank_like(p: &Partition, g: &TripleGraph, exact: impl Fn(NodeId) -> bool) -> Scope {
    let mut blank_only: FxHashMap<Color, bool> = FxHashMap::default();
    for n in g.nodes() {
        let ok = g.is_blank(n) && exact(n);
        blank_only.entry(p.color(n)).and_modify(|b| *b &= ok).or_insert(ok);
    }
    let mut scope = unaligned_nonliterals(p, g);
    for n in g.nodes() {
        if blank_only[&p.color(n)] {
            scope.insert(n);
        }
    }
    scope
}

/// Treats the unaligned non-literal nodes of `p`, and blanks grouped only
/// with blanks, as blank and refines them.
pub fn hybrid_from(p: &Partition, g: &TripleGraph, interner: &ColorInterner) -> Partition {
    let scope = blank_like(p, g, |_| true);
    let start = blank_out(p, &scope, interner);
    refine_fixpoint(&start, g, &scope, interner).partition
}

pub fn hybrid_partition(g: &TripleGraph, interner: &ColorInterner) -> Partition {
    hybrid_from(&deblank_partition(g, interner), g, interner)
}

/// Nodes carrying a URI label.
pub fn is_uri(g: &TripleGraph, n: NodeId) -> bool {
    matches!(g.label(n), Label::Uri(_))
}
