//! Triple graphs: identifier-independent nodes annotated with URI, literal or
//! blank labels, plus the disjoint union used to merge two versions.

use std::fmt;

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

/// Dense node identifier, contiguous from zero within one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// A literal value. `suffix` holds the verbatim datatype (`^^<iri>`) or
/// language tag (`@en`) annotation and takes part in equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub lexical: String,
    pub suffix: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), suffix: None }
    }

    /// Lexical form followed by the annotation, if any.
    pub fn full_text(&self) -> String {
        match &self.suffix {
            Some(s) => format!("{}{}", self.lexical, s),
            None => self.lexical.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Uri(String),
    Literal(Literal),
    /// The single blank value; document-local blank names are not kept.
    Blank,
}

impl Label {
    pub fn uri(s: impl Into<String>) -> Self {
        Label::Uri(s.into())
    }

    pub fn literal(s: impl Into<String>) -> Self {
        Label::Literal(Literal::plain(s))
    }

    pub fn is_uri(&self) -> bool {
        matches!(self, Label::Uri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Label::Literal(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Label::Blank)
    }

    /// Sort rank of the label kind: URIs, then literals, then blanks.
    pub fn kind_rank(&self) -> u8 {
        match self {
            Label::Uri(_) => 0,
            Label::Literal(_) => 1,
            Label::Blank => 2,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Uri(u) => write!(f, "<{u}>"),
            Label::Literal(l) => write!(f, "\"{}\"{}", l.lexical, l.suffix.as_deref().unwrap_or("")),
            Label::Blank => f.write_str("_b"),
        }
    }
}

/// Which version a node of a combined graph came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Source,
    Target,
}

impl Origin {
    pub fn tag(self) -> &'static str {
        match self {
            Origin::Source => "1",
            Origin::Target => "2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: NodeId,
    pub predicate: NodeId,
    pub object: NodeId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// An immutable triple graph with an out-neighbourhood index.
///
/// Triples are kept in first-insertion order (duplicates dropped) so that
/// serialization and blank-node keys are reproducible.
#[derive(Debug, Clone)]
pub struct TripleGraph {
    labels: Vec<Label>,
    origins: Vec<Origin>,
    triples: Vec<Triple>,
    out_offsets: Vec<u32>,
    out_pairs: Vec<(NodeId, NodeId)>,
}

impl TripleGraph {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + Clone {
        (0..self.labels.len() as u32).map(NodeId)
    }

    pub fn label(&self, n: NodeId) -> &Label {
        &self.labels[n.index()]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn origin(&self, n: NodeId) -> Origin {
        self.origins[n.index()]
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.index() < self.labels.len()
    }

    /// Outbound neighbourhood as a sorted, duplicate-free slice of
    /// `(predicate, object)` pairs. Panics if `n` is out of range.
    #[inline]
    pub fn out_slice(&self, n: NodeId) -> &[(NodeId, NodeId)] {
        let i = n.index();
        &self.out_pairs[self.out_offsets[i] as usize..self.out_offsets[i + 1] as usize]
    }

    pub fn out(&self, n: NodeId) -> Result<&[(NodeId, NodeId)], GraphError> {
        if !self.contains(n) {
            return Err(GraphError::UnknownNode(n));
        }
        Ok(self.out_slice(n))
    }

    pub fn nodes_of(&self, origin: Origin) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(move |&n| self.origins[n.index()] == origin)
    }

    pub fn count_of(&self, origin: Origin) -> usize {
        self.origins.iter().filter(|&&o| o == origin).count()
    }

    pub fn is_literal(&self, n: NodeId) -> bool {
        self.labels[n.index()].is_literal()
    }

    pub fn is_blank(&self, n: NodeId) -> bool {
        self.labels[n.index()].is_blank()
    }

    /// Per-kind counts: (uris, literals, blanks).
    pub fn kind_counts(&self, origin: Option<Origin>) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for n in self.nodes() {
            if origin.is_some_and(|o| self.origin(n) != o) {
                continue;
            }
            match self.label(n) {
                Label::Uri(_) => c.0 += 1,
                Label::Literal(_) => c.1 += 1,
                Label::Blank => c.2 += 1,
            }
        }
        c
    }

    pub fn triple_count_of(&self, origin: Origin) -> usize {
        self.triples.iter().filter(|t| self.origin(t.subject) == origin).count()
    }
}

/// Incremental constructor for a single-version graph. URI and literal
/// labels are deduplicated; every `add_blank` call creates a new node.
#[derive(Debug)]
pub struct GraphBuilder {
    origin: Origin,
    labels: Vec<Label>,
    by_label: FxHashMap<Label, NodeId>,
    triples: Vec<Triple>,
    seen: FxHashSet<Triple>,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new(Origin::Source)
    }
}

impl GraphBuilder {
    pub fn new(origin: Origin) -> Self {
        GraphBuilder {
            origin,
            labels: Vec::new(),
            by_label: FxHashMap::default(),
            triples: Vec::new(),
            seen: FxHashSet::default(),
        }
    }

    /// Returns the node carrying `label`, creating it if needed. Blank
    /// labels always create a fresh node.
    pub fn node(&mut self, label: Label) -> NodeId {
        if label.is_blank() {
            return self.add_blank();
        }
        if let Some(&n) = self.by_label.get(&label) {
            return n;
        }
        let n = NodeId(self.labels.len() as u32);
        self.labels.push(label.clone());
        self.by_label.insert(label, n);
        n
    }

    pub fn uri(&mut self, s: &str) -> NodeId {
        self.node(Label::uri(s))
    }

    pub fn literal(&mut self, s: &str) -> NodeId {
        self.node(Label::literal(s))
    }

    pub fn add_blank(&mut self) -> NodeId {
        let n = NodeId(self.labels.len() as u32);
        self.labels.push(Label::Blank);
        n
    }

    /// Adds a triple; returns false if it was already present.
    pub fn triple(&mut self, s: NodeId, p: NodeId, o: NodeId) -> bool {
        let t = Triple { subject: s, predicate: p, object: o };
        if self.seen.insert(t) {
            self.triples.push(t);
            true
        } else {
            false
        }
    }

    pub fn build(self) -> TripleGraph {
        let origins = vec![self.origin; self.labels.len()];
        assemble(self.labels, origins, self.triples)
    }
}

fn assemble(labels: Vec<Label>, origins: Vec<Origin>, triples: Vec<Triple>) -> TripleGraph {
    let n = labels.len();
    let mut counts = vec![0u32; n + 1];
    for t in &triples {
        counts[t.subject.index() + 1] += 1;
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let mut fill = counts.clone();
    let mut pairs = vec![(NodeId(0), NodeId(0)); triples.len()];
    for t in &triples {
        let slot = &mut fill[t.subject.index()];
        pairs[*slot as usize] = (t.predicate, t.object);
        *slot += 1;
    }
    for i in 0..n {
        pairs[counts[i] as usize..counts[i + 1] as usize].sort_unstable();
    }
    TripleGraph { labels, origins, triples, out_offsets: counts, out_pairs: pairs }
}

/// Combines two versions into one graph. Nodes of `g1` keep their ids and
/// are tagged `Source`; nodes of `g2` are shifted by `|g1|` and tagged
/// `Target`. Equal labels across the two inputs stay distinct nodes.
pub fn disjoint_union(g1: &TripleGraph, g2: &TripleGraph) -> TripleGraph {
    let shift = g1.node_count() as u32;
    let mut labels = Vec::with_capacity(g1.node_count() + g2.node_count());
    labels.extend(g1.labels.iter().cloned());
    labels.extend(g2.labels.iter().cloned());
    let mut origins = vec![Origin::Source; g1.node_count()];
    origins.extend(std::iter::repeat(Origin::Target).take(g2.node_count()));
    let mut triples = g1.triples.clone();
    triples.extend(g2.triples.iter().map(|t| Triple {
        subject: NodeId(t.subject.0 + shift),
        predicate: NodeId(t.predicate.0 + shift),
        object: NodeId(t.object.0 + shift),
    }));
    assemble(labels, origins, triples)
}

/// Id of a `g2` node inside `disjoint_union(g1, g2)`.
pub fn shifted(g1: &TripleGraph, n: NodeId) -> NodeId {
    NodeId(n.0 + g1.node_count() as u32)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LiteralSubject { triple: usize, node: NodeId },
    LiteralPredicate { triple: usize, node: NodeId },
    BlankPredicate { triple: usize, node: NodeId },
    DuplicateLabel { first: NodeId, second: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LiteralSubject { triple, node } => {
                write!(f, "triple {triple}: literal {node} in subject position")
            }
            Violation::LiteralPredicate { triple, node } => {
                write!(f, "triple {triple}: literal {node} in predicate position")
            }
            Violation::BlankPredicate { triple, node } => {
                write!(f, "triple {triple}: blank {node} in predicate position")
            }
            Violation::DuplicateLabel { first, second } => {
                write!(f, "nodes {first} and {second} share a label within one version")
            }
        }
    }
}

/// Lists every breach of the RDF conventions. Label uniqueness is checked
/// per origin, so a combined graph may carry the same URI twice.
pub fn validate(g: &TripleGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, t) in g.triples.iter().enumerate() {
        if g.is_literal(t.subject) {
            out.push(Violation::LiteralSubject { triple: i, node: t.subject });
        }
        match g.label(t.predicate) {
            Label::Literal(_) => out.push(Violation::LiteralPredicate { triple: i, node: t.predicate }),
            Label::Blank => out.push(Violation::BlankPredicate { triple: i, node: t.predicate }),
            Label::Uri(_) => {}
        }
    }
    let mut seen: FxHashMap<(Origin, &Label), NodeId> = FxHashMap::default();
    for n in g.nodes() {
        let l = g.label(n);
        if l.is_blank() {
            continue;
        }
        if let Some(&first) = seen.get(&(g.origin(n), l)) {
            out.push(Violation::DuplicateLabel { first, second: n });
        } else {
            seen.insert((g.origin(n), l), n);
        }
    }
    out
}

/// Raw construction used by tests and the generator; skips label
/// deduplication so that invalid graphs can be expressed.
pub fn from_parts(labels: Vec<Label>, origins: Vec<Origin>, triples: Vec<Triple>) -> TripleGraph {
    assert_eq!(labels.len(), origins.len());
    let mut seen = FxHashSet::default();
    let triples = triples.into_iter().filter(|t| seen.insert(*t)).collect();
    assemble(labels, origins, triples)
}
