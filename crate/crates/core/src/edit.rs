//! Reference edit distance between all node pairs of two versions.
//!
//! Pairs aligned by the hybrid partition are at distance 0 and pairs with
//! exactly one aligned member at distance 1. Unaligned literals use
//! normalized Levenshtein distance. Unaligned non-literals are compared by
//! an optimal assignment of their out-edges, iterated to a fixpoint.

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::model::{Label, NodeId, Origin, TripleGraph};
use crate::overlap::normalized_levenshtein;
use crate::partition::{align, ColorInterner};
use crate::refine::hybrid_partition;

pub const DEFAULT_CELL_BUDGET: usize = 10_000_000;
pub const DEFAULT_MAX_ROUNDS: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum EditError {
    #[error("distance matrix needs {cells} cells, over the budget of {budget}")]
    Budget { cells: usize, budget: usize },
    #[error("distances did not settle within {0} rounds")]
    NoConvergence(usize),
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `columns[r]` is the column assigned to row `r`.
    pub columns: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost perfect assignment of a square cost matrix given row-major.
pub fn hungarian(n: usize, cost: &[f64]) -> Assignment {
    assert_eq!(cost.len(), n * n, "cost matrix must be square");
    if n == 0 {
        return Assignment { columns: Vec::new(), cost: 0.0 };
    }
    // Shortest augmenting paths with row/column potentials; index 0 is a sentinel.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut columns = vec![0; n];
    for j in 1..=n {
        columns[row_of[j] - 1] = j - 1;
    }
    let total = columns.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum();
    Assignment { columns, cost: total }
}

/// Pads a `rows × cols` matrix to a square one with `pad` in the new cells.
pub fn pad_square(rows: usize, cols: usize, cost: &[f64], pad: f64) -> (usize, Vec<f64>) {
    let n = rows.max(cols);
    let mut out = vec![pad; n * n];
    for r in 0..rows {
        out[r * n..r * n + cols].copy_from_slice(&cost[r * cols..(r + 1) * cols]);
    }
    (n, out)
}

/// Distances between every source and every target node.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub sources: Vec<NodeId>,
    pub targets: Vec<NodeId>,
    values: Vec<f64>,
    src_pos: FxHashMap<NodeId, usize>,
    tgt_pos: FxHashMap<NodeId, usize>,
    pub rounds: usize,
    pub max_delta: f64,
}

impl DistanceMatrix {
    pub fn get(&self, n: NodeId, m: NodeId) -> f64 {
        self.values[self.src_pos[&n] * self.targets.len() + self.tgt_pos[&m]]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EditConfig {
    pub epsilon: f64,
    pub cell_budget: usize,
    pub max_rounds: usize,
}

impl Default for EditConfig {
    fn default() -> Self {
        EditConfig { epsilon: 1e-6, cell_budget: DEFAULT_CELL_BUDGET, max_rounds: DEFAULT_MAX_ROUNDS }
    }
}

pub fn sigma_edit(g: &TripleGraph, cfg: &EditConfig, interner: &ColorInterner) -> Result<DistanceMatrix, EditError> {
    let sources: Vec<NodeId> = g.nodes_of(Origin::Source).collect();
    let targets: Vec<NodeId> = g.nodes_of(Origin::Target).collect();
    let cells = sources.len() * targets.len();
    if cells > cfg.cell_budget {
        return Err(EditError::Budget { cells, budget: cfg.cell_budget });
    }
    let cols = targets.len();
    let src_pos: FxHashMap<NodeId, usize> = sources.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let tgt_pos: FxHashMap<NodeId, usize> = targets.iter().enumerate().map(|(i, &n)| (n, i)).collect();

    let hybrid = hybrid_partition(g, interner);
    let pairs: FxHashSet<(NodeId, NodeId)> = align(&hybrid, g).into_iter().collect();
    let mut is_aligned = vec![false; g.node_count()];
    for &(a, b) in &pairs {
        is_aligned[a.index()] = true;
        is_aligned[b.index()] = true;
    }

    let mut values = vec![1.0; cells];
    let mut open: Vec<(usize, NodeId, NodeId)> = Vec::new();
    for (i, &n) in sources.iter().enumerate() {
        for (j, &m) in targets.iter().enumerate() {
            let cell = i * cols + j;
            values[cell] = if pairs.contains(&(n, m)) {
                0.0
            } else if is_aligned[n.index()] || is_aligned[m.index()] {
                1.0
            } else {
                match (g.label(n), g.label(m)) {
                    (Label::Literal(a), Label::Literal(b)) => normalized_levenshtein(&a.lexical, &b.lexical),
                    (Label::Literal(_), _) | (_, Label::Literal(_)) => 1.0,
                    _ => {
                        open.push((cell, n, m));
                        1.0
                    }
                }
            };
        }
    }

    let at = |vals: &[f64], a: NodeId, b: NodeId| vals[src_pos[&a] * cols + tgt_pos[&b]];
    let mut rounds = 0;
    let mut max_delta = 0.0;
    while !open.is_empty() {
        if rounds >= cfg.max_rounds {
            return Err(EditError::NoConvergence(cfg.max_rounds));
        }
        rounds += 1;
        let prev = &values;
        let next: Vec<f64> = open
            .par_iter()
            .map(|&(_, n, m)| {
                let (on, om) = (g.out_slice(n), g.out_slice(m));
                let f = on.len().max(om.len());
                if f == 0 {
                    return 0.0;
                }
                let mut cost = Vec::with_capacity(on.len() * om.len());
                for &(p1, o1) in on {
                    for &(p2, o2) in om {
                        cost.push((at(prev, p1, p2) + at(prev, o1, o2)).min(1.0));
                    }
                }
                let (size, square) = pad_square(on.len(), om.len(), &cost, 1.0);
                let a = hungarian(size, &square);
                let f = f as f64;
                a.columns
                    .iter()
                    .enumerate()
                    .fold(0.0f64, |acc, (r, &c)| (acc + square[r * size + c] / f).min(1.0))
            })
            .collect();
        max_delta = 0.0f64;
        for (&(cell, _, _), v) in open.iter().zip(next) {
            max_delta = max_delta.max((values[cell] - v).abs());
            values[cell] = v;
        }
        if max_delta < cfg.epsilon {
            break;
        }
    }
    Ok(DistanceMatrix { sources, targets, values, src_pos, tgt_pos, rounds, max_delta })
}

/// Pairs at distance at most `theta`, sorted.
pub fn align_sigma(d: &DistanceMatrix, theta: f64) -> Vec<(NodeId, NodeId, f64)> {
    let cols = d.targets.len();
    let mut out = Vec::new();
    for (i, &n) in d.sources.iter().enumerate() {
        for (j, &m) in d.targets.iter().enumerate() {
            let v = d.values[i * cols + j];
            if v <= theta {
                out.push((n, m, v));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{edited_pair, graph};
    use crate::model::{disjoint_union, shifted};

    fn dp_levenshtein(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            d[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("abc", "ac"), 1);
        assert_eq!(levenshtein("same", "same"), 0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(dp_levenshtein("kitten", "sitting"), 3);
        for (a, b) in [("", "abc"), ("flaw", "lawn"), ("über", "uber"), ("gumbo", "gambol")] {
            assert_eq!(levenshtein(a, b), dp_levenshtein(a, b));
        }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for k in 0..=p.len() {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn hungarian_small_cases() {
        let a = hungarian(2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(a.columns, vec![0, 1]);
        assert_eq!(a.cost, 0.0);
        let a = hungarian(3, &[0.5; 9]);
        assert!((a.cost - 1.5).abs() < 1e-12);
        assert_eq!(hungarian(0, &[]), Assignment { columns: vec![], cost: 0.0 });
    }

    #[test]
    fn hungarian_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let perms = permutations(6);
        assert_eq!(perms.len(), 720);
        for _ in 0..50 {
            let cost: Vec<f64> = (0..36).map(|_| rng.gen::<f64>()).collect();
            let best = perms
                .iter()
                .map(|p| p.iter().enumerate().map(|(r, &c)| cost[r * 6 + c]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let a = hungarian(6, &cost);
            assert!((a.cost - best).abs() < 1e-9);
            let mut cols = a.columns.clone();
            cols.sort_unstable();
            assert_eq!(cols, (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn padding_fills_with_cost() {
        let (n, sq) = pad_square(1, 2, &[0.1, 0.2], 1.0);
        assert_eq!(n, 2);
        assert_eq!(sq, vec![0.1, 0.2, 1.0, 1.0]);
    }

    fn edit_fixture() -> (TripleGraph, TripleGraph, TripleGraph) {
        let (g1, g2) = edited_pair();
        let g = disjoint_union(&g1, &g2);
        (g1, g2, g)
    }

    #[test]
    fn edit_example_distances() {
        let (g1, g2, g) = edit_fixture();
        let i = ColorInterner::new();
        let d = sigma_edit(&g, &EditConfig { epsilon: 1e-12, ..Default::default() }, &i).unwrap();
        let lit = |gg: &TripleGraph, s: &str| gg.nodes().find(|&n| *gg.label(n) == Label::literal(s)).unwrap();
        let (abc, ac) = (lit(&g1, "abc"), shifted(&g1, lit(&g2, "ac")));
        let (a1, c1) = (lit(&g1, "a"), lit(&g1, "c"));
        let c2 = shifted(&g1, lit(&g2, "c"));
        // Blank ids: w = 0, u = 2, v = 4 in both versions.
        let (w1, u1, v1) = (NodeId(0), NodeId(2), NodeId(4));
        let (w2, u2, v2) = (shifted(&g1, NodeId(0)), shifted(&g1, NodeId(2)), shifted(&g1, NodeId(4)));
        let close = |x: f64, y: f64| (x - y).abs() < 1e-9;
        assert!(close(d.get(abc, ac), 1.0 / 3.0));
        assert!(close(d.get(c1, c2), 0.0));
        assert!(close(d.get(a1, ac), 1.0));
        assert!(close(d.get(v1, v2), 1.0 / 6.0));
        assert!(close(d.get(u1, u2), 1.0 / 3.0));
        assert!(close(d.get(w1, w2), 0.25));
        assert!(close(d.get(u1, v2), 2.0 / 3.0));
        assert!(d.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn align_sigma_is_inclusive() {
        let (_, _, g) = edit_fixture();
        let i = ColorInterner::new();
        let d = sigma_edit(&g, &EditConfig::default(), &i).unwrap();
        let at_third = align_sigma(&d, 1.0 / 3.0 + 1e-9);
        let names: Vec<_> = at_third.iter().map(|&(n, m, _)| (n, m)).collect();
        assert!(names.contains(&(NodeId(2), shifted(&edited_pair().0, NodeId(2)))));
        let strict = align_sigma(&d, 0.0);
        assert!(strict.iter().all(|&(_, _, v)| v == 0.0));
    }

    #[test]
    fn budget_is_enforced() {
        let (_, _, g) = edit_fixture();
        let i = ColorInterner::new();
        let err = sigma_edit(&g, &EditConfig { cell_budget: 10, ..Default::default() }, &i).unwrap_err();
        assert!(matches!(err, EditError::Budget { .. }));
    }

    #[test]
    fn identical_graphs_have_zero_diagonal() {
        let g1 = graph(Origin::Source, &[("_a", "p", "\"x"), ("_a", "q", "_b"), ("_b", "p", "\"y")]);
        let g = disjoint_union(&g1, &g1);
        let i = ColorInterner::new();
        let d = sigma_edit(&g, &EditConfig::default(), &i).unwrap();
        for n in g1.nodes() {
            assert_eq!(d.get(n, shifted(&g1, n)), 0.0);
        }
        assert_eq!(d.rounds, 0);
    }
}
