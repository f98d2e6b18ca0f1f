use geoloc_core::analysis::{
    analyze_scores, bias, make_log_bins, score_distribution, AnalysisError, BinParams,
};
use geoloc_core::estimator::classify_users;
use geoloc_core::synth::{planted_partition, PlantedPartitionParams};
use geoloc_core::{
    BiasValue, CentralityKind, CentralityScores, GroupPartition, SocialGraph, UserId,
};
use geoloc_oracles as oracle;
use proptest::prelude::*;
use rand::Rng;

fn graph(n: u64) -> SocialGraph {
    SocialGraph::build(&[], (0..n).map(UserId)).unwrap()
}

fn scores(values: Vec<f64>) -> CentralityScores {
    CentralityScores {
        kind: CentralityKind::PageRank,
        values,
    }
}

#[test]
fn decade_example_fractions() {
    let g = graph(3);
    let spec = make_log_bins(1.0, 100.0, 1, false).unwrap();
    let d = score_distribution(&scores(vec![1.0, 1.0, 10.0]), &g, g.ids(), &spec).unwrap();
    assert_eq!(d.counts, vec![2, 1]);
    assert_eq!(d.fractions(), vec![2.0 / 3.0, 1.0 / 3.0]);

    let d = score_distribution(&scores(vec![2.0, 3.0, 4.0]), &g, g.ids(), &spec).unwrap();
    assert_eq!(d.fractions(), vec![1.0, 0.0]);
}

#[test]
fn distribution_errors() {
    let g = graph(2);
    let spec = make_log_bins(1.0, 100.0, 1, false).unwrap();
    let err = score_distribution(&scores(vec![1.0, 500.0]), &g, g.ids(), &spec).unwrap_err();
    assert_eq!(
        err,
        AnalysisError::ScoreOutOfBins {
            user: UserId(1),
            score: 500.0
        }
    );
    assert!(err.to_string().contains("500") && err.to_string().contains("user 1"));
    assert_eq!(
        score_distribution(&scores(vec![1.0, 1.0]), &g, &[], &spec).unwrap_err(),
        AnalysisError::EmptyUserSet
    );
    assert!(matches!(
        score_distribution(&scores(vec![1.0]), &g, g.ids(), &spec),
        Err(AnalysisError::LengthMismatch { .. })
    ));
}

#[test]
fn random_bins_cover_their_range() {
    let mut rng = oracle::rng(5);
    for _ in 0..200 {
        let min = 10f64.powf(rng.random_range(-12.0..3.0));
        let max = min * 10f64.powf(rng.random_range(0.0..8.0));
        let bpd = rng.random_range(1..12);
        let spec = make_log_bins(min, max, bpd, true).unwrap();
        let edges = spec.edges();
        assert!(edges.windows(2).all(|w| w[0] < w[1]));
        for x in [min, max]
            .into_iter()
            .chain((0..200).map(|_| min * (max / min).powf(rng.random_range(0.0..=1.0))))
        {
            let x = x.clamp(min, max);
            let hits = (0..spec.bin_count())
                .filter(|&i| {
                    let (lo, hi) = spec.bounds(i);
                    if spec.has_zero_bin() && i == 0 {
                        x == 0.0
                    } else {
                        lo <= x && x < hi
                    }
                })
                .count();
            assert_eq!(hits, 1, "x {x} in spec {spec:?}");
            assert!(spec.bin_of(x).is_some());
        }
    }
}

#[test]
fn counts_match_linear_scan() {
    let mut rng = oracle::rng(9);
    for _ in 0..50 {
        let n = rng.random_range(1..300u64);
        let values: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.1) {
                    0.0
                } else {
                    10f64.powf(rng.random_range(-4.0..2.0))
                }
            })
            .collect();
        let g = graph(n);
        let s = scores(values.clone());
        let report_spec =
            geoloc_core::analysis::population_bins(&s, &BinParams::default()).unwrap();
        let d = score_distribution(&s, &g, g.ids(), &report_spec).unwrap();
        let want = oracle::linear_scan_histogram(&values, report_spec.edges(), true).unwrap();
        assert_eq!(d.counts, want);
        assert_eq!(d.counts.iter().sum::<u64>(), d.total);
        let fsum: f64 = d.fractions().iter().sum();
        assert!((fsum - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn bias_identities() {
    let g = graph(6);
    let s = scores(vec![0.0, 1.0, 2.0, 20.0, 30.0, 300.0]);
    let spec = make_log_bins(1.0, 300.0, 1, true).unwrap();
    let overall = score_distribution(&s, &g, g.ids(), &spec).unwrap();
    let same = bias(&overall, &overall).unwrap();
    assert!(same
        .values
        .iter()
        .all(|v| matches!(v, BiasValue::Defined(x) if *x == 0.0)));

    let group = score_distribution(&s, &g, &[UserId(1), UserId(2), UserId(3)], &spec).unwrap();
    let forward = bias(&group, &overall).unwrap();
    let backward = bias(&overall, &group).unwrap();
    for (f, b) in forward.values.iter().zip(&backward.values) {
        match (f, b) {
            (BiasValue::Defined(x), BiasValue::Defined(y)) => assert!((x + y).abs() < 1e-15),
            (BiasValue::Undefined, BiasValue::Undefined) => {}
            other => panic!("definedness differs: {other:?}"),
        }
    }
}

#[test]
fn report_has_three_groups_and_two_biases() {
    let (g, h) = planted_partition(&PlantedPartitionParams {
        communities: 3,
        size: 8,
        p_in: 0.5,
        p_out: 0.05,
        reciprocity: 0.6,
        seed: 1,
    })
    .unwrap();
    let part = classify_users(&g, &h).unwrap().partition;
    let (s, _) =
        geoloc_core::centrality::compute(&g, CentralityKind::InDegree, &Default::default())
            .unwrap();
    let r = analyze_scores(&s, &g, &part, &BinParams::default()).unwrap();
    assert_eq!(r.groups.len(), 3);
    assert_eq!(r.groups.iter().filter(|gs| gs.bias.is_some()).count(), 2);
    assert!(r.groups[2].bias.is_none());

    // Everyone easy: the easy distribution equals overall, bias is zero where
    // defined, and the empty hard group has no defined bias.
    let all = GroupPartition {
        easy: g.ids().to_vec(),
        ..Default::default()
    };
    let r = analyze_scores(&s, &g, &all, &BinParams::default()).unwrap();
    let easy_bias = r.groups[0].bias.as_ref().unwrap();
    for (i, v) in easy_bias.values.iter().enumerate() {
        match v {
            BiasValue::Defined(x) => assert_eq!(*x, 0.0),
            BiasValue::Undefined => assert_eq!(r.overall.counts[i], 0),
        }
    }
    assert_eq!(r.groups[1].distribution.total, 0);
    assert!(r.groups[1]
        .bias
        .as_ref()
        .unwrap()
        .values
        .iter()
        .all(|v| *v == BiasValue::Undefined));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// Group counts add up to the overall counts in every bin.
    #[test]
    fn mixture_identity(seed in 0u64..1_000_000) {
        let mut rng = oracle::rng(seed);
        let n = rng.random_range(1..400u64);
        let values: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.0..1.0f64).powi(3) + 1e-9 })
            .collect();
        let g = graph(n);
        let mut part = GroupPartition::default();
        for &u in g.ids() {
            match rng.random_range(0..3) {
                0 => part.easy.push(u),
                1 => part.hard.push(u),
                _ => part.unknown.push(u),
            }
        }
        let r = analyze_scores(&scores(values), &g, &part, &BinParams::default()).unwrap();
        for i in 0..r.spec.bin_count() {
            let sum: u64 = r.groups.iter().map(|gs| gs.distribution.counts[i]).sum();
            prop_assert_eq!(sum, r.overall.counts[i]);
        }
        prop_assert_eq!(r.overall.total, n);
    }
}
