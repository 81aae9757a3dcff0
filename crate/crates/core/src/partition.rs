//! Colors, partitions and the alignments they induce.

use std::hash::{BuildHasher, Hash};

use hashbrown::HashTable;
use parking_lot::Mutex;
use rayon::prelude::*;
use rustc_hash::{FxBuildHasher, FxHashMap, FxHashSet};

use crate::model::{Label, NodeId, Origin, TripleGraph};

/// An interned color. Equal ids mean equal descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Color(pub u32);

/// Structural description of a color.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ColorDesc {
    /// Color shared by every node carrying this label.
    Label(Label),
    /// Color unique to one node.
    Node(NodeId),
    /// Fresh color minted when merging candidate matches.
    Component(u32),
    /// A base color together with the set of `(predicate, object)` colors
    /// of the outbound edges, sorted and deduplicated.
    Pair(Color, Box<[(Color, Color)]>),
    /// A copy of a color kept apart from a class it would otherwise join.
    Shift(Color),
}

struct Table {
    descs: Vec<ColorDesc>,
    index: HashTable<u32>,
    components: u32,
}

/// Hash-consing store for colors. Shared by every partition that is to be
/// compared, so that equal structure yields equal ids.
pub struct ColorInterner {
    hasher: FxBuildHasher,
    table: Mutex<Table>,
}

impl Default for ColorInterner {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for ColorInterner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ColorInterner").field("len", &self.len()).finish()
    }
}

impl ColorInterner {
    pub fn new() -> Self {
        ColorInterner {
            hasher: FxBuildHasher,
            table: Mutex::new(Table { descs: Vec::new(), index: HashTable::new(), components: 0 }),
        }
    }

    pub fn len(&self) -> usize {
        self.table.lock().descs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn hash(&self, d: &ColorDesc) -> u64 {
        self.hasher.hash_one(d)
    }

    fn insert(&self, t: &mut Table, h: u64, d: ColorDesc) -> Color {
        let Table { descs, index, .. } = t;
        if let Some(&id) = index.find(h, |&id| descs[id as usize] == d) {
            return Color(id);
        }
        let id = descs.len() as u32;
        descs.push(d);
        index.insert_unique(h, id, |&id| self.hasher.hash_one(&descs[id as usize]));
        Color(id)
    }

    pub fn intern(&self, d: ColorDesc) -> Color {
        let h = self.hash(&d);
        let mut t = self.table.lock();
        self.insert(&mut t, h, d)
    }

    /// Interns a batch in order. Hashing runs in parallel; insertion is
    /// sequential so that ids do not depend on scheduling.
    pub fn intern_batch(&self, descs: Vec<ColorDesc>) -> Vec<Color> {
        let hashed: Vec<(u64, ColorDesc)> = descs.into_par_iter().map(|d| (self.hash(&d), d)).collect();
        let mut t = self.table.lock();
        hashed.into_iter().map(|(h, d)| self.insert(&mut t, h, d)).collect()
    }

    pub fn describe(&self, c: Color) -> ColorDesc {
        self.table.lock().descs[c.0 as usize].clone()
    }

    /// Placeholder color given to every blanked-out node.
    pub fn blank(&self) -> Color {
        self.intern(ColorDesc::Label(Label::Blank))
    }

    pub fn fresh_component(&self) -> Color {
        let mut t = self.table.lock();
        let k = t.components;
        t.components += 1;
        let d = ColorDesc::Component(k);
        let h = self.hash(&d);
        self.insert(&mut t, h, d)
    }
}

/// A coloring of every node of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    colors: Vec<Color>,
}

impl Partition {
    pub fn from_colors(colors: Vec<Color>) -> Self {
        Partition { colors }
    }

    #[inline]
    pub fn color(&self, n: NodeId) -> Color {
        self.colors[n.index()]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn set(&mut self, n: NodeId, c: Color) {
        self.colors[n.index()] = c;
    }

    pub fn class_count(&self) -> usize {
        self.colors.iter().collect::<FxHashSet<_>>().len()
    }

    /// Classes as lists of nodes, ordered by their smallest member.
    pub fn classes(&self) -> Vec<Vec<NodeId>> {
        let mut by: FxHashMap<Color, usize> = FxHashMap::default();
        let mut out: Vec<Vec<NodeId>> = Vec::new();
        for (i, &c) in self.colors.iter().enumerate() {
            let slot = *by.entry(c).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[slot].push(NodeId(i as u32));
        }
        out
    }
}

/// Every node colored by its label; blank nodes share one color.
pub fn label_partition(g: &TripleGraph, interner: &ColorInterner) -> Partition {
    let descs = g.labels().iter().map(|l| ColorDesc::Label(l.clone())).collect();
    Partition::from_colors(interner.intern_batch(descs))
}

/// URIs and literals colored by label, each blank node by itself.
pub fn trivial_partition(g: &TripleGraph, interner: &ColorInterner) -> Partition {
    let descs = g
        .nodes()
        .map(|n| match g.label(n) {
            Label::Blank => ColorDesc::Node(n),
            l => ColorDesc::Label(l.clone()),
        })
        .collect();
    Partition::from_colors(interner.intern_batch(descs))
}

/// All source/target pairs sharing a color, sorted.
pub fn align(p: &Partition, g: &TripleGraph) -> Vec<(NodeId, NodeId)> {
    let mut classes: FxHashMap<Color, (Vec<NodeId>, Vec<NodeId>)> = FxHashMap::default();
    for n in g.nodes() {
        let e = classes.entry(p.color(n)).or_default();
        match g.origin(n) {
            Origin::Source => e.0.push(n),
            Origin::Target => e.1.push(n),
        }
    }
    let mut out = Vec::new();
    for (src, tgt) in classes.values() {
        for &a in src {
            for &b in tgt {
                out.push((a, b));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Nodes of `origin` whose class has no member from the other version.
pub fn unaligned(p: &Partition, g: &TripleGraph, origin: Origin) -> Vec<NodeId> {
    let sides = class_sides(p, g);
    g.nodes_of(origin).filter(|&n| sides[&p.color(n)] != 3).collect()
}

/// Unaligned nodes of both versions, in id order.
pub fn unaligned_all(p: &Partition, g: &TripleGraph) -> Vec<NodeId> {
    let sides = class_sides(p, g);
    g.nodes().filter(|&n| sides[&p.color(n)] != 3).collect()
}

// Bit 1: class has a source node, bit 2: a target node.
fn class_sides(p: &Partition, g: &TripleGraph) -> FxHashMap<Color, u8> {
    let mut sides: FxHashMap<Color, u8> = FxHashMap::default();
    for n in g.nodes() {
        let bit = match g.origin(n) {
            Origin::Source => 1,
            Origin::Target => 2,
        };
        *sides.entry(p.color(n)).or_default() |= bit;
    }
    sides
}

/// Whether both partitions induce the same equivalence relation.
pub fn equivalent(a: &Partition, b: &Partition) -> bool {
    a.len() == b.len() && finer(a, b) && finer(b, a)
}

/// Whether every class of `a` lies inside a class of `b`.
pub fn finer(a: &Partition, b: &Partition) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut map: FxHashMap<Color, Color> = FxHashMap::default();
    for (&ca, &cb) in a.colors.iter().zip(&b.colors) {
        if *map.entry(ca).or_insert(cb) != cb {
            return false;
        }
    }
    true
}

/// Whether `(a,b), (a',b), (a,b')` in the alignment imply `(a',b')`.
pub fn has_crossover(alignment: &[(NodeId, NodeId)]) -> bool {
    let set: FxHashSet<(NodeId, NodeId)> = alignment.iter().copied().collect();
    let mut by_src: FxHashMap<NodeId, Vec<NodeId>> = FxHashMap::default();
    let mut by_tgt: FxHashMap<NodeId, Vec<NodeId>> = FxHashMap::default();
    for &(a, b) in alignment {
        by_src.entry(a).or_default().push(b);
        by_tgt.entry(b).or_default().push(a);
    }
    for &(a, b) in alignment {
        for &a2 in &by_tgt[&b] {
            for &b2 in &by_src[&a] {
                if !set.contains(&(a2, b2)) {
                    return false;
                }
            }
        }
    }
    true
}

/// One `key<TAB>color` line per node, for debugging.
pub fn dump(p: &Partition, keys: &[crate::keys::NodeKey]) -> String {
    let mut out = String::new();
    for (k, c) in keys.iter().zip(&p.colors) {
        out.push_str(&format!("{}\t{}\n", k, c.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{graph, renamed_pair};
    use crate::model::disjoint_union;

    #[test]
    fn interning_is_stable() {
        let i = ColorInterner::new();
        let a = i.intern(ColorDesc::Label(Label::uri("x")));
        let b = i.intern(ColorDesc::Label(Label::uri("x")));
        let c = i.intern(ColorDesc::Pair(a, vec![(a, a)].into()));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(i.intern(ColorDesc::Pair(a, vec![(a, a)].into())), c);
        assert_eq!(i.describe(c), ColorDesc::Pair(a, vec![(a, a)].into()));
        assert_ne!(i.fresh_component(), i.fresh_component());
    }

    #[test]
    fn batch_matches_single_interning() {
        let i = ColorInterner::new();
        let descs: Vec<_> = (0..500).map(|k| ColorDesc::Node(NodeId(k % 37))).collect();
        let batch = i.intern_batch(descs.clone());
        for (d, c) in descs.into_iter().zip(batch) {
            assert_eq!(i.intern(d), c);
        }
        assert_eq!(i.len(), 37);
    }

    #[test]
    fn trivial_alignment_pairs_equal_labels() {
        let (g1, g2) = renamed_pair();
        let g = disjoint_union(&g1, &g2);
        let i = ColorInterner::new();
        let p = trivial_partition(&g, &i);
        let pairs = align(&p, &g);
        // w, p, q, r, "a", "b" are shared; blanks and u/v are not.
        assert_eq!(pairs.len(), 6);
        for (a, b) in pairs {
            assert_eq!(g.label(a), g.label(b));
            assert!(!g.is_blank(a));
        }
    }

    #[test]
    fn unaligned_nodes_of_identical_graphs() {
        let g1 = graph(Origin::Source, &[("a", "p", "\"x")]);
        let g = disjoint_union(&g1, &g1);
        let i = ColorInterner::new();
        let p = label_partition(&g, &i);
        assert!(unaligned_all(&p, &g).is_empty());
    }

    #[test]
    fn finer_and_equivalent() {
        let c = |v: &[u32]| Partition::from_colors(v.iter().map(|&x| Color(x)).collect());
        let fine = c(&[0, 1, 2, 2]);
        let coarse = c(&[5, 5, 7, 7]);
        assert!(finer(&fine, &coarse));
        assert!(!finer(&coarse, &fine));
        assert!(equivalent(&fine, &c(&[9, 8, 3, 3])));
        assert!(!equivalent(&fine, &coarse));
    }

    #[test]
    fn crossover_detects_missing_pair() {
        let n = NodeId;
        assert!(has_crossover(&[(n(0), n(2)), (n(1), n(2)), (n(0), n(3)), (n(1), n(3))]));
        assert!(!has_crossover(&[(n(0), n(2)), (n(1), n(2)), (n(0), n(3))]));
    }
}
