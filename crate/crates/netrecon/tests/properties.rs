//! Property tests: canonicalization of tallies, normalization of posterior
//! rows, label symmetries of the objective, and file round-trips.

mod common;

use proptest::prelude::*;

use netrecon::io;
use netrecon::models::log_posterior_objective;
use netrecon::params::{BernoulliParams, EdgeTypesParams};
use netrecon::types::{build_tallies, cells};
use netrecon::{em, ModelParams, Network, NodeIndex, TallyData};

fn label(id: u8) -> String {
    format!("n{id}")
}

/// Records whose endpoints are always distinct.
fn records_strategy() -> impl Strategy<Value = Vec<(String, String, u8)>> {
    prop::collection::vec(
        (0u8..6, 1u8..6, prop::bool::ANY).prop_map(|(a, shift, hit)| {
            let b = (a + shift) % 6;
            (label(a), label(b), u8::from(hit))
        }),
        0..40,
    )
}

fn family_instance(family: u8, seed: u64) -> (TallyData, ModelParams) {
    let mut r = common::rng(seed);
    match family % 6 {
        0 => common::random_bernoulli(&mut r, 5),
        1 => common::random_poisson(&mut r, 5, 2),
        2 => common::random_config(&mut r, 5, 3),
        3 => common::random_multimodal(&mut r, 4, 2),
        4 => common::random_per_node(&mut r, 4),
        _ => common::random_edge_types(&mut r, 5, 3),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_tallies_are_canonical(records in records_strategy(), directed in any::<bool>()) {
        let tally = build_tallies(&records, directed).unwrap();
        prop_assert_eq!(tally.directed(), directed);
        let entries = tally.entries();
        for w in entries.windows(2) {
            prop_assert!((w[0].i, w[0].j) < (w[1].i, w[1].j));
        }
        for e in entries {
            prop_assert!(e.i != e.j);
            if !directed {
                prop_assert!(e.i < e.j);
            }
            prop_assert!(e.positives <= e.trials);
            prop_assert!(e.trials >= 1);
        }
        let total: u64 = entries.iter().map(|e| e.trials as u64).sum();
        prop_assert_eq!(total, records.len() as u64);
    }

    #[test]
    fn orientation_does_not_matter_undirected(
        records in records_strategy(),
        flips in prop::collection::vec(any::<bool>(), 40),
    ) {
        let flipped: Vec<(String, String, u8)> = records
            .iter()
            .zip(&flips)
            .map(|((a, b, o), &flip)| {
                if flip {
                    (b.clone(), a.clone(), *o)
                } else {
                    (a.clone(), b.clone(), *o)
                }
            })
            .collect();
        let base = build_tallies(&records, false).unwrap();
        let other = build_tallies(&flipped, false).unwrap();
        let key = |t: &netrecon::MeasurementTally| {
            t.entries()
                .iter()
                .map(|e| {
                    let a = t.index().label(e.i).to_string();
                    let b = t.index().label(e.j).to_string();
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    (lo, hi, e.trials, e.positives)
                })
                .collect::<std::collections::BTreeSet<_>>()
        };
        prop_assert_eq!(key(&base), key(&other));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn posterior_rows_are_distributions(family in 0u8..6, seed in any::<u64>()) {
        let (data, params) = family_instance(family, seed);
        let post = em::estep(&params, &data).unwrap();
        let mut row = Vec::new();
        for (i, j) in cells(post.n(), post.directed()) {
            post.value_dist(i, j, &mut row);
            let mut total = 0.0;
            for &p in &row {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p), "entry {p} outside [0, 1]");
                total += p;
            }
            prop_assert!((total - 1.0).abs() < 1e-9, "row sums to {total}");
            let q = post.edge_prob(i, j);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&q));
        }
    }

    #[test]
    fn objective_is_finite(family in 0u8..6, seed in any::<u64>()) {
        let (data, params) = family_instance(family, seed);
        let objective = log_posterior_objective(&data, &params).unwrap();
        prop_assert!(objective.is_finite());
    }

    #[test]
    fn swapping_bernoulli_labels_preserves_the_objective(
        seed in any::<u64>(),
        edge_prob in 0.05f64..0.95,
        true_pos in 0.05f64..0.95,
        false_pos in 0.05f64..0.95,
    ) {
        let mut r = common::rng(seed);
        let data = TallyData::Single(common::random_tally(&mut r, 5, false, 0.8, 4));
        let a = ModelParams::Bernoulli(BernoulliParams { edge_prob, true_pos, false_pos });
        let b = ModelParams::Bernoulli(BernoulliParams {
            edge_prob: 1.0 - edge_prob,
            true_pos: false_pos,
            false_pos: true_pos,
        });
        let oa = log_posterior_objective(&data, &a).unwrap();
        let ob = log_posterior_objective(&data, &b).unwrap();
        prop_assert!((oa - ob).abs() < 1e-10, "{oa} vs {ob}");
        let pa = em::estep(&a, &data).unwrap();
        let pb = em::estep(&b, &data).unwrap();
        for (i, j) in cells(5, false) {
            let qa = pa.edge_prob(i, j);
            let qb = 1.0 - pb.edge_prob(i, j);
            prop_assert!((qa - qb).abs() < 1e-12);
        }
    }

    #[test]
    fn permuting_edge_types_preserves_the_objective(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let (data, params) = common::random_edge_types(&mut r, 5, 3);
        let ModelParams::EdgeTypes(p) = &params else { unreachable!() };
        let reversed = ModelParams::EdgeTypes(EdgeTypesParams {
            type_prob: p.type_prob.iter().rev().copied().collect(),
            detect: p.detect.iter().rev().copied().collect(),
        });
        let oa = log_posterior_objective(&data, &params).unwrap();
        let ob = log_posterior_objective(&data, &reversed).unwrap();
        prop_assert!((oa - ob).abs() < 1e-10, "{oa} vs {ob}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tally_files_round_trip(seed in any::<u64>(), directed in any::<bool>()) {
        let mut r = common::rng(seed);
        let tally = common::random_tally(&mut r, 5, directed, 0.6, 4);
        let data = TallyData::Single(tally);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tally.tsv");
        io::write_tally(&path, &data).unwrap();
        let back = io::read_tally(&path).unwrap();
        let TallyData::Single(a) = &data else { unreachable!() };
        let TallyData::Single(b) = &back else { panic!("mode change on round trip") };
        prop_assert_eq!(a.directed(), b.directed());
        prop_assert_eq!(a.index().labels(), b.index().labels());
        prop_assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn multimodal_tally_files_round_trip(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let (data, _) = common::random_multimodal(&mut r, 4, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tally.tsv");
        io::write_tally(&path, &data).unwrap();
        let back = io::read_tally(&path).unwrap();
        let TallyData::Modes(a) = &data else { unreachable!() };
        let TallyData::Modes(b) = &back else { panic!("mode change on round trip") };
        prop_assert_eq!(a.modes(), b.modes());
        prop_assert_eq!(a.index().labels(), b.index().labels());
        prop_assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn network_files_round_trip(
        seed in any::<u64>(),
        directed in any::<bool>(),
        loops in 0u32..3,
    ) {
        let mut r = common::rng(seed);
        use rand::Rng;
        let n = 5usize;
        let mut g = Network::empty(n, directed);
        for (i, j) in cells(n, directed) {
            if r.random_bool(0.5) {
                g.set_pair(i, j, r.random_range(1..=3));
            }
        }
        if !directed && loops > 0 {
            g.set_self_loops(2, loops);
        }
        let index = NodeIndex::anonymous(n);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.tsv");
        io::write_network(&path, &g, &index).unwrap();
        let (back, idx) = io::read_network(&path).unwrap();
        prop_assert_eq!(back.directed(), directed);
        prop_assert_eq!(idx.labels(), index.labels());
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                prop_assert_eq!(g.value(i, j), back.value(i, j), "cell ({}, {})", i, j);
            }
        }
    }

    #[test]
    fn fit_reports_round_trip(family in 0u8..6, seed in any::<u64>()) {
        let (data, params) = family_instance(family, seed);
        let report = io::FitReport {
            model: params.model_id(),
            params: params.clone(),
            nodes: data.index().labels().to_vec(),
            objective: -12.5,
            iterations: 3,
            converged: true,
            restart: 1,
            notes: vec!["held a rate".into()],
            false_discovery_rate: None,
            reporter_precision: None,
            input: Some("data.tsv".into()),
            config: Some(netrecon::em::EmConfig::default()),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fit.json");
        io::write_report(&path, &report).unwrap();
        let (back, nodes) = io::read_params(&path).unwrap();
        prop_assert_eq!(&back, &params);
        prop_assert_eq!(nodes.as_deref(), Some(report.nodes.as_slice()));
    }
}
