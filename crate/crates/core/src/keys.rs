//! Stable textual node keys used in alignment output and ground truth.
//!
//! URIs map to `U:<uri>`, literals to `L:<sha1 of the literal text>` and
//! blank nodes to `B:<origin>:<index>`. The blank index comes from a
//! breadth-first walk that starts at the non-blank nodes (sorted by kind
//! and text) and follows out-edges in triple order, so it only depends on
//! the document's content and triple order, never on blank labels.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;
use sha1::{Digest, Sha1};

use crate::model::{Label, NodeId, Origin, TripleGraph};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeKey(pub String);

impl std::fmt::Display for NodeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn literal_digest(text: &str) -> String {
    let digest = Sha1::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Keys for every node of `g`, indexed by node id.
pub fn node_keys(g: &TripleGraph) -> Vec<NodeKey> {
    let blank_index = blank_indices(g);
    g.nodes()
        .map(|n| match g.label(n) {
            Label::Uri(u) => NodeKey(format!("U:{u}")),
            Label::Literal(l) => NodeKey(format!("L:{}", literal_digest(&l.full_text()))),
            Label::Blank => NodeKey(format!("B:{}:{}", g.origin(n).tag(), blank_index[n.index()])),
        })
        .collect()
}

fn blank_indices(g: &TripleGraph) -> Vec<u32> {
    let mut index = vec![u32::MAX; g.node_count()];
    let mut by_triple: Vec<Vec<NodeId>> = vec![Vec::new(); g.node_count()];
    for t in g.triples() {
        by_triple[t.subject.index()].push(t.object);
    }
    for origin in [Origin::Source, Origin::Target] {
        let mut roots: Vec<NodeId> = g.nodes_of(origin).filter(|&n| !g.is_blank(n)).collect();
        roots.sort_by(|&a, &b| g.label(a).cmp(g.label(b)).then(a.cmp(&b)));
        let mut next = 0u32;
        let mut visited = vec![false; g.node_count()];
        let mut queue: VecDeque<NodeId> = VecDeque::new();
        let mut walk = |start: NodeId, index: &mut Vec<u32>, next: &mut u32, visited: &mut Vec<bool>| {
            if visited[start.index()] {
                return;
            }
            visited[start.index()] = true;
            if g.is_blank(start) {
                index[start.index()] = *next;
                *next += 1;
            }
            queue.push_back(start);
            while let Some(n) = queue.pop_front() {
                for &o in &by_triple[n.index()] {
                    if !visited[o.index()] {
                        visited[o.index()] = true;
                        if g.is_blank(o) {
                            index[o.index()] = *next;
                            *next += 1;
                        }
                        queue.push_back(o);
                    }
                }
            }
        };
        for r in roots {
            walk(r, &mut index, &mut next, &mut visited);
        }
        let rest: Vec<NodeId> = g.nodes_of(origin).filter(|&n| g.is_blank(n)).collect();
        for n in rest {
            walk(n, &mut index, &mut next, &mut visited);
        }
    }
    index
}

/// Reverse lookup from key to node for one origin.
pub fn key_index(g: &TripleGraph, keys: &[NodeKey], origin: Origin) -> FxHashMap<String, NodeId> {
    g.nodes_of(origin).map(|n| (keys[n.index()].0.clone(), n)).collect()
}
