mod support;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdfalign_core::edit::{sigma_edit, EditConfig};
use rdfalign_core::eval::{aligned_edge_ratio, evaluate_side};
use rdfalign_core::overlap::{
    diff, exhaustive_match, overlap, overlap_match, overlap_partition, sigma_nl, CharObject, LiteralTokens, MatchConfig,
    OverlapConfig, PrefixMode,
};
use rdfalign_core::partition::{equivalent, finer, has_crossover, label_partition, trivial_partition};
use rdfalign_core::refine::{blank_out, hybrid_from, refine_fixpoint, refine_step};
use rdfalign_core::weighted::{align_theta, propagate};
use rdfalign_core::*;
use support::{brute_bisim, random_pair, same_relation};

fn random_partition(g: &TripleGraph, rng: &mut ChaCha8Rng, classes: u32, offset: u32, i: &ColorInterner) -> Partition {
    let colors = g.nodes().map(|_| i.intern(ColorDesc::Node(NodeId(offset + rng.gen_range(0..classes))))).collect();
    Partition::from_colors(colors)
}

/// Same classes as `p`, spelled with unrelated colors.
fn recolored(p: &Partition, i: &ColorInterner) -> Partition {
    let mut seen: Vec<Color> = Vec::new();
    let colors = p
        .colors()
        .iter()
        .map(|c| {
            let k = seen.iter().position(|x| x == c).unwrap_or_else(|| {
                seen.push(*c);
                seen.len() - 1
            });
            i.intern(ColorDesc::Component(1_000_000 + k as u32))
        })
        .collect();
    Partition::from_colors(colors)
}

fn random_scope(g: &TripleGraph, rng: &mut ChaCha8Rng) -> Scope {
    Scope::from_nodes(g.node_count(), g.nodes().filter(|_| rng.gen_bool(0.6)))
}

fn naive_fixpoint(start: &Partition, g: &TripleGraph, scope: &Scope, i: &ColorInterner) -> Partition {
    let mut p = start.clone();
    loop {
        let q = refine_step(&p, g, scope, i);
        if equivalent(&p, &q) {
            return p;
        }
        p = q;
    }
}

fn subset<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.iter().all(|x| b.contains(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn refine_step_is_finer_and_class_invariant(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let i = ColorInterner::new();
        let mut p = random_partition(&g, &mut rng, 3, 0, &i);
        for _ in 0..4 {
            let scope = random_scope(&g, &mut rng);
            let q = refine_step(&p, &g, &scope, &i);
            prop_assert!(finer(&q, &p));
            let q2 = refine_step(&recolored(&p, &i), &g, &scope, &i);
            prop_assert!(equivalent(&q, &q2));
            p = q;
        }
    }

    #[test]
    fn fixpoint_matches_naive_iteration_and_is_bounded(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = ColorInterner::new();
        let start = label_partition(&g, &i);
        for scope in [Scope::all(g.node_count()), Scope::blanks(&g), random_scope(&g, &mut rng)] {
            let r = refine_fixpoint(&start, &g, &scope, &i);
            prop_assert!(r.steps <= g.node_count() + 1);
            prop_assert!(equivalent(&r.partition, &naive_fixpoint(&start, &g, &scope, &i)));
            let again = refine_step(&r.partition, &g, &scope, &i);
            prop_assert!(equivalent(&again, &r.partition));
        }
    }

    #[test]
    fn bisimulation_matches_brute_force(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let i = ColorInterner::new();
        prop_assert!(same_relation(&bisim_partition(&g, &i), &brute_bisim(&g)));
    }

    #[test]
    fn alignment_hierarchy_and_crossover(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let i = ColorInterner::new();
        let t = align(&trivial_partition(&g, &i), &g);
        let d = align(&deblank_partition(&g, &i), &g);
        let h = align(&hybrid_partition(&g, &i), &g);
        let b = align(&bisim_partition(&g, &i), &g);
        prop_assert!(subset(&t, &d));
        prop_assert!(subset(&d, &h));
        for a in [&t, &d, &h, &b] {
            prop_assert!(has_crossover(a));
        }
    }

    #[test]
    fn hybrid_does_not_depend_on_starting_point(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let i = ColorInterner::new();
        let h = hybrid_partition(&g, &i);
        prop_assert!(equivalent(&h, &hybrid_from(&trivial_partition(&g, &i), &g, &i)));
        for start in [trivial_partition(&g, &i), deblank_partition(&g, &i)] {
            let r = propagate(&WeightedPartition::exact(start), &g, 1e-3, 1000, &i).unwrap();
            prop_assert!(equivalent(&r.xi.partition, &h));
            prop_assert!(r.xi.weights.iter().all(|w| w.get() == 0.0));
        }
    }

    #[test]
    fn colors_are_deterministic(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let (i1, i2) = (ColorInterner::new(), ColorInterner::new());
        prop_assert_eq!(hybrid_partition(&g, &i1), hybrid_partition(&g, &i2));
        prop_assert_eq!(bisim_partition(&g, &i1), bisim_partition(&g, &i2));
    }

    #[test]
    fn blank_out_is_idempotent(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = ColorInterner::new();
        let p = deblank_partition(&g, &i);
        let x = random_scope(&g, &mut rng);
        let once = blank_out(&p, &x, &i);
        prop_assert_eq!(blank_out(&once, &x, &i), once);
    }

    #[test]
    fn overlap_and_diff_sum_to_one(a in prop::collection::btree_set(0u8..12, 0..8), b in prop::collection::btree_set(0u8..12, 0..8)) {
        let (a, b): (Vec<u8>, Vec<u8>) = (a.into_iter().collect(), b.into_iter().collect());
        let o = overlap(&a, &b);
        prop_assert!((0.0..=1.0).contains(&o));
        prop_assert!((o + diff(&a, &b) - 1.0).abs() < 1e-12);
        prop_assert_eq!(o, overlap(&b, &a));
    }

    #[test]
    fn indexed_matching_agrees_with_exhaustive(
        sets in prop::collection::vec(prop::collection::btree_set(0u8..10, 1..7), 2..16),
        split in 1usize..15,
        sim in 0.05f64..1.0,
        theta in 0.0f64..1.0,
    ) {
        let split = split.min(sets.len() - 1);
        let nodes: Vec<NodeId> = (0..sets.len() as u32).map(NodeId).collect();
        let (a, b) = nodes.split_at(split);
        let chars = |n: NodeId| -> Vec<CharObject> {
            sets[n.index()].iter().map(|t| CharObject::Token(t.to_string().into())).collect::<std::collections::BTreeSet<_>>().into_iter().collect()
        };
        let sigma = |n: NodeId, m: NodeId| Weight::saturating(((n.0 * 7 + m.0 * 3) % 10) as f64 / 10.0);
        let mut cfg = MatchConfig { theta, similarity: sim, prefix: PrefixMode::Safe };
        let full = exhaustive_match(a, b, &cfg, chars, sigma);
        prop_assert_eq!(&overlap_match(a, b, &cfg, chars, sigma), &full);
        cfg.prefix = PrefixMode::Paper;
        let probed = overlap_match(a, b, &cfg, chars, sigma);
        prop_assert!(subset(&probed.edges, &full.edges));
        if sim > 0.5 {
            prop_assert_eq!(&probed, &full);
        }
    }

    #[test]
    fn weighted_distances_are_bounded_and_thresholds_nest(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = ColorInterner::new();
        let mut xi = WeightedPartition::exact(hybrid_partition(&g, &i));
        for w in xi.weights.iter_mut() {
            *w = Weight::new(rng.gen_range(0.0..=1.0)).unwrap();
        }
        let non_literal: Vec<NodeId> = g.nodes().filter(|&n| !g.is_literal(n)).collect();
        for &n in &non_literal {
            for &m in &non_literal {
                let s = sigma_nl(&xi, &g, n, m).unwrap().get();
                prop_assert!((0.0..=1.0).contains(&s));
                prop_assert_eq!(s, sigma_nl(&xi, &g, m, n).unwrap().get());
            }
        }
        let thetas = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        for w in thetas.windows(2) {
            prop_assert!(subset(&align_theta(&xi, &g, w[0]), &align_theta(&xi, &g, w[1])));
        }
    }

    #[test]
    fn edge_ratio_grows_with_the_alignment(seed in any::<u64>()) {
        let g = random_pair(seed, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src: Vec<NodeId> = g.nodes_of(Origin::Source).collect();
        let tgt: Vec<NodeId> = g.nodes_of(Origin::Target).collect();
        let all: Vec<(NodeId, NodeId)> = src.iter().flat_map(|&a| tgt.iter().map(move |&b| (a, b))).collect();
        let big: Vec<_> = all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let small: Vec<_> = big.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let (rs, rb) = (aligned_edge_ratio(&g, &small), aligned_edge_ratio(&g, &big));
        prop_assert!((0.0..=1.0).contains(&rs) && (0.0..=1.0).contains(&rb));
        prop_assert!(rs <= rb);
        prop_assert!(aligned_edge_ratio(&g, &all) >= rb);
    }

    #[test]
    fn evaluation_categories_partition_the_nodes(
        alignment in prop::collection::vec((0u32..8, 8u32..16), 0..20),
        truth in prop::collection::btree_map(0u32..8, 8u32..16, 0..8),
    ) {
        let alignment: Vec<(NodeId, NodeId)> = alignment.into_iter().map(|(a, b)| (NodeId(a), NodeId(b))).collect();
        let truth: Vec<(NodeId, NodeId)> = truth.into_iter().map(|(a, b)| (NodeId(a), NodeId(b))).collect();
        let r = evaluate_side(&alignment, &truth, |_| true);
        let mut all: Vec<NodeId> = [&r.exact, &r.inclusive, &r.missing, &r.false_matches].into_iter().flatten().copied().collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        prop_assert_eq!(all.len(), total);
        let mut expected: Vec<NodeId> = alignment.iter().chain(&truth).map(|&(a, _)| a).collect();
        expected.sort_unstable();
        expected.dedup();
        prop_assert_eq!(all, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn overlap_distances_bound_the_edit_distance(
        seed in any::<u64>(),
        theta in prop::sample::select(vec![0.3, 0.5, 0.65, 0.8]),
        chars in any::<bool>(),
    ) {
        let g = random_pair(seed, 4);
        let i = ColorInterner::new();
        // Weights on cycles are limits approached from opposite sides by the
        // two iterations, so both run to a tight tolerance.
        let mut cfg = OverlapConfig::with_theta(theta);
        cfg.epsilon = 1e-10;
        if chars {
            cfg.tokens = LiteralTokens::Chars;
        }
        let out = overlap_partition(&g, &cfg, &i).unwrap();
        let d = sigma_edit(&g, &EditConfig { epsilon: 1e-10, ..EditConfig::default() }, &i).unwrap();
        for n in g.nodes_of(Origin::Source) {
            for m in g.nodes_of(Origin::Target) {
                let s = out.xi.sigma(n, m).get();
                prop_assert!(d.get(n, m) <= s + 1e-8, "pair {n} {m}: edit {} > {}", d.get(n, m), s);
            }
        }
    }
}
