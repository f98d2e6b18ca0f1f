use std::collections::BTreeSet;

use geoloc_core::centrality::{self, degree_scores, hits, pagerank, Direction};
use geoloc_core::{CentralityKind, IterationParams, SocialGraph, UserId};
use geoloc_oracles as oracle;
use proptest::prelude::*;
use rand::Rng;

fn build(n: u64, edges: &[(u64, u64)]) -> SocialGraph {
    let e: Vec<_> = edges.iter().map(|&(a, b)| (UserId(a), UserId(b))).collect();
    SocialGraph::build(&e, (0..n).map(UserId)).unwrap()
}

fn random_instance(seed: u64) -> (usize, BTreeSet<(u64, u64)>, SocialGraph) {
    let mut rng = oracle::rng(seed);
    let n = rng.random_range(1..=50u64);
    let p = rng.random_range(0.02..0.3);
    let reciprocity = rng.random_range(0.0..1.0);
    let raw = oracle::random_edges(&mut rng, n, p, reciprocity);
    let nodes: BTreeSet<u64> = (0..n).collect();
    let clean = oracle::clean_edges(&raw, &nodes);
    (n as usize, clean, build(n, &raw))
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn degree_matches_recount() {
    for seed in 0..20 {
        let (n, edges, g) = random_instance(seed);
        let mut ins = vec![0.0; n];
        let mut outs = vec![0.0; n];
        for &(a, b) in &edges {
            outs[a as usize] += 1.0;
            ins[b as usize] += 1.0;
        }
        assert_eq!(degree_scores(&g, Direction::In).values, ins);
        assert_eq!(degree_scores(&g, Direction::Out).values, outs);
    }
}

#[test]
fn pagerank_three_node_sink() {
    let g = build(3, &[(0, 2), (1, 2)]);
    let (s, _) = pagerank(&g, &IterationParams::default()).unwrap();
    let nodes: BTreeSet<u64> = (0..3).collect();
    let want = oracle::dense_pagerank(3, &oracle::clean_edges(&[(0, 2), (1, 2)], &nodes), 0.85);
    assert!(linf(&s.values, &want) < 1e-8, "{:?} vs {want:?}", s.values);
}

#[test]
fn pagerank_matches_dense_solve() {
    for seed in 0..100 {
        let (n, edges, g) = random_instance(seed);
        let (s, conv) = pagerank(&g, &IterationParams::default()).unwrap();
        let want = oracle::dense_pagerank(n, &edges, 0.85);
        let err = linf(&s.values, &want);
        assert!(err < 1e-8, "seed {seed}: L-inf error {err}");
        assert!(conv.iterations <= 200);
        let sum: f64 = s.values.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9);
        let floor = 0.15 / n as f64 - 1e-12;
        assert!(s.values.iter().all(|&v| v >= floor));
    }
}

/// The stopping rule bounds the last step, not the distance to the fixed
/// point, which is larger by `r / (1 - r)` for eigenvalue ratio `r`. A tight
/// tolerance keeps that factor out of the comparison.
fn tight() -> IterationParams {
    IterationParams {
        tolerance: 1e-13,
        max_iterations: 200_000,
        ..Default::default()
    }
}

#[test]
fn hits_matches_dense_eigenvector() {
    for seed in 0..100 {
        let (n, edges, g) = random_instance(seed);
        let (a, h, _) = hits(&g, &tight()).unwrap();
        if edges.is_empty() {
            assert!(a.values.iter().all(|&x| x == 1.0 / n as f64));
            continue;
        }
        let (want_a, want_h) = oracle::dense_hits(n, &edges);
        let err = linf(&a.values, &want_a).max(linf(&h.values, &want_h));
        assert!(
            err < 1e-8,
            "seed {seed}: error {err}, gap ratio {}",
            oracle::hits_gap_ratio(n, &edges)
        );
    }
}

#[test]
fn hits_invariants() {
    for seed in 100..150 {
        let (_, edges, g) = random_instance(seed);
        let (a, h, _) = hits(&g, &IterationParams::default()).unwrap();
        for v in [&a.values, &h.values] {
            assert!(v.iter().all(|&x| x >= 0.0));
            assert!((v.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
        if !edges.is_empty() {
            for u in 0..g.node_count() {
                if g.in_degree(u) == 0 {
                    assert_eq!(a.values[u], 0.0);
                }
                if g.out_degree(u) == 0 {
                    assert_eq!(h.values[u], 0.0);
                }
            }
        }
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let (_, _, g) = random_instance(7);
    let p = IterationParams::default();
    for kind in CentralityKind::ALL {
        let (a, ca) = centrality::compute(&g, kind, &p).unwrap();
        let (b, cb) = centrality::compute(&g, kind, &p).unwrap();
        assert_eq!(a.kind, kind);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.values), bits(&b.values));
        assert_eq!(ca, cb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Relabelling node ids permutes PageRank and HITS scores accordingly.
    #[test]
    fn relabelling_permutes_scores(seed in 0u64..10_000, shift in 1u64..1000) {
        let (n, edges, g) = random_instance(seed);
        // Reverse the id order and offset: old id i becomes shift + (n-1-i).
        let relabel = |i: u64| shift + (n as u64 - 1 - i);
        let e: Vec<_> = edges.iter().map(|&(a, b)| (relabel(a), relabel(b))).collect();
        let e: Vec<_> = e.iter().map(|&(a, b)| (UserId(a), UserId(b))).collect();
        let h = SocialGraph::build(&e, (0..n as u64).map(|i| UserId(relabel(i)))).unwrap();
        let p = IterationParams::default();
        let (pa, _) = pagerank(&g, &p).unwrap();
        let (pb, _) = pagerank(&h, &p).unwrap();
        let (aa, ha, _) = hits(&g, &tight()).unwrap();
        let (ab, hb, _) = hits(&h, &tight()).unwrap();
        for i in 0..n {
            let j = n - 1 - i;
            prop_assert!((pa.values[i] - pb.values[j]).abs() < 1e-10);
            prop_assert!((aa.values[i] - ab.values[j]).abs() < 1e-8);
            prop_assert!((ha.values[i] - hb.values[j]).abs() < 1e-8);
        }
    }
}
