//! Small hand-built graphs shared by tests, benches and the acceptance suite.

use crate::model::{GraphBuilder, NodeId, Origin, TripleGraph};

/// Builds a graph from `(s, p, o)` term strings: `_x` is a blank node named
/// `x`, `"x` a literal `x`, anything else a URI.
pub fn graph(origin: Origin, triples: &[(&str, &str, &str)]) -> TripleGraph {
    let mut b = GraphBuilder::new(origin);
    let mut blanks = rustc_hash::FxHashMap::default();
    let mut term = |b: &mut GraphBuilder, t: &str| -> NodeId {
        if let Some(name) = t.strip_prefix('_') {
            *blanks.entry(name.to_string()).or_insert_with(|| b.add_blank())
        } else if let Some(lit) = t.strip_prefix('"') {
            b.literal(lit)
        } else {
            b.uri(t)
        }
    };
    for &(s, p, o) in triples {
        let s = term(&mut b, s);
        let p = term(&mut b, p);
        let o = term(&mut b, o);
        b.triple(s, p, o);
    }
    b.build()
}

/// Ten triples; three blank nodes, two of which (`b2`, `b3`) are
/// bisimilar leaves while `b1` sits on a cycle through `u` and `w`.
pub fn nested_blanks() -> TripleGraph {
    graph(
        Origin::Source,
        &[
            ("w", "p", "_b3"),
            ("w", "p", "_b1"),
            ("_b1", "q", "u"),
            ("_b1", "r", "\"b"),
            ("u", "p", "_b2"),
            ("u", "q", "\"a"),
            ("u", "q", "\"b"),
            ("u", "r", "w"),
            ("_b2", "q", "\"a"),
            ("_b3", "q", "\"a"),
        ],
    )
}

/// `nested_blanks` against a version where `u` was renamed to `v` and the
/// two bisimilar blank leaves were merged.
pub fn renamed_pair() -> (TripleGraph, TripleGraph) {
    let g2 = graph(
        Origin::Source,
        &[
            ("w", "p", "_b4"),
            ("w", "p", "_b5"),
            ("_b5", "q", "v"),
            ("_b5", "r", "\"b"),
            ("v", "p", "_b4"),
            ("v", "q", "\"a"),
            ("v", "q", "\"b"),
            ("v", "r", "w"),
            ("_b4", "q", "\"a"),
        ],
    );
    (nested_blanks(), g2)
}

/// Two blank-node trees differing by one literal edit ("abc" to "ac") and
/// one deleted edge (`u p "b"`).
pub fn edited_pair() -> (TripleGraph, TripleGraph) {
    let g1 = graph(
        Origin::Source,
        &[
            ("_w", "r", "_u"),
            ("_w", "q", "_v"),
            ("_u", "p", "\"a"),
            ("_u", "p", "\"b"),
            ("_u", "p", "\"c"),
            ("_v", "p", "\"c"),
            ("_v", "q", "\"abc"),
        ],
    );
    let g2 = graph(
        Origin::Source,
        &[
            ("_w", "r", "_u"),
            ("_w", "q", "_v"),
            ("_u", "p", "\"a"),
            ("_u", "p", "\"c"),
            ("_v", "p", "\"c"),
            ("_v", "q", "\"ac"),
        ],
    );
    (g1, g2)
}

/// Directed path `x0 -e-> x1 -e-> ... x{k-1}` of blank nodes.
pub fn blank_path(k: usize) -> TripleGraph {
    let mut b = GraphBuilder::new(Origin::Source);
    let e = b.uri("e");
    let nodes: Vec<_> = (0..k).map(|_| b.add_blank()).collect();
    for w in nodes.windows(2) {
        b.triple(w[0], e, w[1]);
    }
    b.build()
}
