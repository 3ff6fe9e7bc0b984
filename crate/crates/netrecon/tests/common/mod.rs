//! Shared helpers for the integration tests: seeded random instances small
//! enough for exact enumeration, and posterior comparison utilities.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netrecon::params::{
    BernoulliParams, ConfigParams, EdgeTypesParams, ModelParams, MultimodalParams, PerNodeParams,
    PoissonParams,
};
use netrecon::types::{cells, MeasurementTally, ModeTallyEntry, MultimodalTally, TallyEntry};
use netrecon::{EdgePosterior, NodeIndex, TallyData};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random measurement entries over the cells of an `n`-node graph. Each
/// cell is measured with probability `coverage`, receiving 1 to `max_trials`
/// checks and a uniform number of positives.
pub fn random_tally<R: Rng>(
    rng: &mut R,
    n: usize,
    directed: bool,
    coverage: f64,
    max_trials: u32,
) -> MeasurementTally {
    let mut entries = Vec::new();
    for (i, j) in cells(n, directed) {
        if !rng.random_bool(coverage) {
            continue;
        }
        let trials = rng.random_range(1..=max_trials);
        let positives = rng.random_range(0..=trials);
        entries.push(TallyEntry {
            i,
            j,
            trials,
            positives,
        });
    }
    MeasurementTally::from_entries(NodeIndex::anonymous(n), directed, entries).unwrap()
}

pub fn random_bernoulli<R: Rng>(rng: &mut R, n: usize) -> (TallyData, ModelParams) {
    let data = TallyData::Single(random_tally(rng, n, false, 0.8, 4));
    let params = ModelParams::Bernoulli(BernoulliParams {
        edge_prob: rng.random_range(0.05..0.6),
        true_pos: rng.random_range(0.55..0.95),
        false_pos: rng.random_range(0.01..0.3),
    });
    (data, params)
}

fn random_detect<R: Rng>(rng: &mut R, width: usize) -> Vec<f64> {
    let mut detect = vec![rng.random_range(0.01..0.2)];
    for _ in 1..width {
        detect.push(rng.random_range(0.4..0.9));
    }
    detect
}

pub fn random_poisson<R: Rng>(rng: &mut R, n: usize, width: usize) -> (TallyData, ModelParams) {
    let data = TallyData::Single(random_tally(rng, n, false, 0.8, 4));
    let params = ModelParams::Poisson(PoissonParams {
        edge_mean: rng.random_range(0.1..1.2),
        detect: random_detect(rng, width),
    });
    (data, params)
}

fn random_propensity<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut phi: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let mean = phi.iter().sum::<f64>() / n as f64;
    for p in &mut phi {
        *p /= mean;
    }
    phi
}

pub fn random_config<R: Rng>(rng: &mut R, n: usize, width: usize) -> (TallyData, ModelParams) {
    let data = TallyData::Single(random_tally(rng, n, false, 0.8, 4));
    let params = ModelParams::Config(ConfigParams {
        edge_mean: rng.random_range(0.1..1.2),
        propensity: random_propensity(rng, n),
        detect: random_detect(rng, width),
    });
    (data, params)
}

pub fn random_multimodal<R: Rng>(rng: &mut R, n: usize, modes: usize) -> (TallyData, ModelParams) {
    let mode_names: Vec<String> = (0..modes).map(|m| format!("m{m}")).collect();
    let mut entries = Vec::new();
    for (i, j) in cells(n, true) {
        if !rng.random_bool(0.7) {
            continue;
        }
        let trials: Vec<u32> = (0..modes).map(|_| rng.random_range(0..=3)).collect();
        let positives: Vec<u32> = trials.iter().map(|&t| rng.random_range(0..=t)).collect();
        if trials.iter().all(|&t| t == 0) {
            continue;
        }
        entries.push(ModeTallyEntry {
            i,
            j,
            trials,
            positives,
        });
    }
    let tally = MultimodalTally::from_entries(NodeIndex::anonymous(n), mode_names, entries).unwrap();
    let params = ModelParams::Multimodal(MultimodalParams {
        edge_prob: rng.random_range(0.05..0.5),
        true_pos: (0..modes).map(|_| rng.random_range(0.5..0.95)).collect(),
        false_pos: (0..modes).map(|_| rng.random_range(0.01..0.2)).collect(),
    });
    (TallyData::Modes(tally), params)
}

pub fn random_per_node<R: Rng>(rng: &mut R, n: usize) -> (TallyData, ModelParams) {
    let data = TallyData::Single(random_tally(rng, n, true, 0.7, 3));
    let params = ModelParams::PerNode(PerNodeParams {
        edge_mean: rng.random_range(0.1..1.0),
        propensity: random_propensity(rng, n),
        report: (0..n)
            .map(|_| {
                vec![
                    rng.random_range(0.01..0.2),
                    rng.random_range(0.5..0.95),
                ]
            })
            .collect(),
    });
    (data, params)
}

pub fn random_edge_types<R: Rng>(rng: &mut R, n: usize, states: usize) -> (TallyData, ModelParams) {
    let data = TallyData::Single(random_tally(rng, n, false, 0.8, 4));
    let mut type_prob: Vec<f64> = (0..states).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = type_prob.iter().sum();
    for p in &mut type_prob {
        *p /= total;
    }
    let mut detect = vec![rng.random_range(0.01..0.15)];
    for _ in 1..states {
        detect.push(rng.random_range(0.3..0.95));
    }
    let params = ModelParams::EdgeTypes(EdgeTypesParams { type_prob, detect });
    (data, params)
}

/// Every oracle-sized instance family, labeled, at a given seed.
pub fn all_families(seed: u64) -> Vec<(&'static str, TallyData, ModelParams)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let (d, p) = random_bernoulli(&mut r, 4);
    out.push(("bernoulli", d, p));
    let (d, p) = random_poisson(&mut r, 4, 2);
    out.push(("poisson-sparse", d, p));
    let (d, p) = random_poisson(&mut r, 4, 3);
    out.push(("poisson-k2", d, p));
    let (d, p) = random_config(&mut r, 4, 2);
    out.push(("config", d, p));
    let (d, p) = random_multimodal(&mut r, 4, 2);
    out.push(("multimodal", d, p));
    let (d, p) = random_per_node(&mut r, 4);
    out.push(("per-node", d, p));
    let (d, p) = random_edge_types(&mut r, 4, 3);
    out.push(("edge-types", d, p));
    out
}

/// Largest absolute difference between the full per-cell value
/// distributions of two posteriors over the same cells.
pub fn max_row_diff(a: &EdgePosterior, b: &EdgePosterior) -> f64 {
    assert_eq!(a.n(), b.n());
    assert_eq!(a.directed(), b.directed());
    assert_eq!(a.width(), b.width());
    let mut ra = Vec::new();
    let mut rb = Vec::new();
    let mut worst = 0.0f64;
    for (i, j) in cells(a.n(), a.directed()) {
        a.value_dist(i, j, &mut ra);
        b.value_dist(i, j, &mut rb);
        for (x, y) in ra.iter().zip(&rb) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a} vs {b} differ by {}",
        (a - b).abs()
    );
}
