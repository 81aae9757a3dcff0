//! Random graphs and reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdfalign_core::model::{disjoint_union, GraphBuilder, Label, Origin, TripleGraph};
use rdfalign_core::{NodeId, Partition};

const URIS: [&str; 3] = ["a", "b", "c"];
const PREDICATES: [&str; 2] = ["p", "q"];
const LITERALS: [&str; 8] = ["x", "xy", "abc", "ac", "x y", "alpha", "delta x", "gamma ray"];

#[derive(Clone, Debug)]
enum Term {
    Uri(String),
    Lit(String),
    Blank,
}

#[derive(Clone, Debug)]
struct Side {
    terms: Vec<Term>,
    edges: Vec<(usize, usize, usize)>,
}

fn random_term(rng: &mut ChaCha8Rng) -> Term {
    match rng.gen_range(0..3) {
        0 => Term::Uri(URIS.choose(rng).unwrap().to_string()),
        1 => Term::Lit(LITERALS.choose(rng).unwrap().to_string()),
        _ => Term::Blank,
    }
}

fn random_side(rng: &mut ChaCha8Rng, max_terms: usize) -> Side {
    let k = rng.gen_range(1..=max_terms);
    let mut terms: Vec<Term> = (0..k).map(|_| random_term(rng)).collect();
    if matches!(terms[0], Term::Lit(_)) {
        terms[0] = Term::Blank;
    }
    let mut side = Side { terms, edges: Vec::new() };
    let m = rng.gen_range(0..=2 * k);
    for _ in 0..m {
        add_edge(rng, &mut side);
    }
    side
}

fn add_edge(rng: &mut ChaCha8Rng, side: &mut Side) {
    let subjects: Vec<usize> =
        (0..side.terms.len()).filter(|&i| !matches!(side.terms[i], Term::Lit(_))).collect();
    let s = *subjects.choose(rng).unwrap();
    let p = rng.gen_range(0..PREDICATES.len());
    let o = rng.gen_range(0..side.terms.len());
    side.edges.push((s, p, o));
}

fn mutate(rng: &mut ChaCha8Rng, side: &Side) -> Side {
    let mut out = side.clone();
    for _ in 0..rng.gen_range(1..=2) {
        match rng.gen_range(0..4) {
            0 if !out.edges.is_empty() => {
                let i = rng.gen_range(0..out.edges.len());
                out.edges.remove(i);
            }
            1 => add_edge(rng, &mut out),
            _ => {
                let i = rng.gen_range(0..out.terms.len());
                out.terms[i] = match &out.terms[i] {
                    Term::Lit(l) => Term::Lit(typo(rng, l)),
                    Term::Uri(u) => Term::Uri(format!("{u}2")),
                    Term::Blank => Term::Blank,
                };
            }
        }
    }
    out
}

/// Deletes, replaces or inserts one character.
fn typo(rng: &mut ChaCha8Rng, s: &str) -> String {
    let mut c: Vec<char> = s.chars().collect();
    let i = rng.gen_range(0..=c.len());
    match rng.gen_range(0..3) {
        0 if i < c.len() => {
            c.remove(i);
        }
        1 if i < c.len() => c[i] = 'z',
        _ => c.insert(i, 'q'),
    }
    c.into_iter().collect()
}

fn build(side: &Side, origin: Origin) -> TripleGraph {
    let mut b = GraphBuilder::new(origin);
    let ids: Vec<NodeId> = side
        .terms
        .iter()
        .map(|t| match t {
            Term::Uri(u) => b.uri(u),
            Term::Lit(l) => b.literal(l),
            Term::Blank => b.add_blank(),
        })
        .collect();
    for &(s, p, o) in &side.edges {
        let p = b.uri(PREDICATES[p]);
        b.triple(ids[s], p, ids[o]);
    }
    b.build()
}

/// A combined graph of at most `2 * (max_terms + 2)` nodes. Half of the
/// time the target is a lightly edited copy of the source.
pub fn random_pair(seed: u64, max_terms: usize) -> TripleGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s1 = random_side(&mut rng, max_terms);
    let s2 = if rng.gen_bool(0.5) { mutate(&mut rng, &s1) } else { random_side(&mut rng, max_terms) };
    disjoint_union(&build(&s1, Origin::Source), &build(&s2, Origin::Target))
}

/// Greatest bisimulation by naive relation refinement.
pub fn brute_bisim(g: &TripleGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut rel = vec![vec![false; n]; n];
    for a in g.nodes() {
        for b in g.nodes() {
            rel[a.index()][b.index()] = g.label(a) == g.label(b);
        }
    }
    loop {
        let mut changed = false;
        for a in g.nodes() {
            for b in g.nodes() {
                if !rel[a.index()][b.index()] {
                    continue;
                }
                let covers = |x: NodeId, y: NodeId| {
                    g.out_slice(x).iter().all(|&(p, o)| {
                        g.out_slice(y).iter().any(|&(p2, o2)| rel[p.index()][p2.index()] && rel[o.index()][o2.index()])
                    })
                };
                if !(covers(a, b) && covers(b, a)) {
                    rel[a.index()][b.index()] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

pub fn same_relation(p: &Partition, rel: &[Vec<bool>]) -> bool {
    let n = p.len();
    (0..n).all(|a| (0..n).all(|b| (p.colors()[a] == p.colors()[b]) == rel[a][b]))
}

/// Minimum assignment cost by enumerating every permutation.
pub fn brute_assignment(n: usize, cost: &[f64]) -> f64 {
    fn go(row: usize, n: usize, cost: &[f64], used: &mut [bool], acc: f64, best: &mut f64) {
        if row == n {
            *best = best.min(acc);
            return;
        }
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                go(row + 1, n, cost, used, acc + cost[row * n + c], best);
                used[c] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, n, cost, &mut vec![false; n], 0.0, &mut best);
    if n == 0 {
        0.0
    } else {
        best
    }
}

pub fn blank_count(g: &TripleGraph) -> usize {
    g.labels().iter().filter(|l| matches!(l, Label::Blank)).count()
}
