//! EM steps for the multigraph models with a global detection table:
//! plain Poisson pair means `μ_ij = ω` and propensity-weighted means
//! `μ_ij = ω φ_i φ_j`.
//!
//! E-step, per pair with counts (E, N):
//!
//! ```text
//! Q_ij(k) ∝ (μ_ij^k / k!) · detect[k]^E (1-detect[k])^(N-E),  k < width,
//! ```
//!
//! M-step: ω is the mean posterior multiplicity over all ordered cells,
//! `detect[k]` re-weighs counts by Q(k), and the propensities are
//! proportional to posterior row sums, normalized to mean 1. Both models
//! share one code path (`φ ≡ 1` is the plain Poisson), so the reduction
//! between them is exact.

use crate::error::{Error, Result};
use crate::logspace::normalize_log_weights;
use crate::models::{fill_detect_terms, fill_mult_log_weights, pair_mean};
use crate::params::{ConfigParams, PoissonParams};
use crate::posterior::EdgePosterior;
use crate::types::{cells, MeasurementTally};

pub fn estep_poisson(p: &PoissonParams, t: &MeasurementTally) -> Result<EdgePosterior> {
    multiedge_estep(t, p.edge_mean, None, &p.detect)
}

pub fn estep_config(p: &ConfigParams, t: &MeasurementTally) -> Result<EdgePosterior> {
    multiedge_estep(t, p.edge_mean, Some(&p.propensity), &p.detect)
}

fn multiedge_estep(
    t: &MeasurementTally,
    edge_mean: f64,
    phi: Option<&[f64]>,
    detect: &[f64],
) -> Result<EdgePosterior> {
    if t.directed() {
        return Err(Error::ModelMismatch(
            "multiedge models take undirected tallies".into(),
        ));
    }
    let width = detect.len();
    let mut keys = Vec::with_capacity(t.entries().len());
    let mut rows = Vec::with_capacity(t.entries().len() * width);
    let mut terms = Vec::with_capacity(width);
    let mut weights = Vec::with_capacity(width);
    for e in t.entries() {
        fill_detect_terms(detect, e.positives, e.trials, &mut terms);
        let mu = pair_mean(edge_mean, phi, e.i, e.j);
        fill_mult_log_weights(mu, &terms, &mut weights);
        let z = normalize_log_weights(&mut weights);
        if z == f64::NEG_INFINITY {
            return Err(Error::InvalidInput(format!(
                "pair ({}, {}) is impossible at every multiplicity",
                e.i, e.j
            )));
        }
        keys.push((e.i, e.j));
        rows.extend_from_slice(&weights);
    }
    EdgePosterior::multigraph(
        t.index().clone(),
        keys,
        width,
        rows,
        edge_mean,
        phi.map(<[f64]>::to_vec),
    )
}

/// Posterior mean multiplicity per node and overall, swept over every
/// pair cell of an undirected multigraph posterior.
pub(super) struct PairMeanSweep {
    /// `Σ_j  E[A_ij]` per node i (each unordered pair feeds both ends).
    pub row_means: Vec<f64>,
    /// Sum of `row_means`, i.e. `Σ_ij E[A_ij]` over ordered pairs.
    pub total: f64,
}

pub(super) fn sweep_pair_means(post: &EdgePosterior) -> PairMeanSweep {
    let n = post.n();
    let mut row_means = vec![0.0; n];
    let mut total = 0.0;
    let mut row = Vec::new();
    for (i, j) in cells(n, false) {
        post.value_dist(i, j, &mut row);
        let mut a = 0.0;
        for (k, &p) in row.iter().enumerate() {
            a += k as f64 * p;
        }
        row_means[i as usize] += a;
        row_means[j as usize] += a;
        total += 2.0 * a;
    }
    PairMeanSweep { row_means, total }
}

/// Detection-rate update shared by both models: `detect[k]` becomes the
/// positive-check fraction re-weighted by the posterior mass on
/// multiplicity k. Rates with no posterior weight are held.
pub(super) fn update_detect(
    prev: &[f64],
    t: &MeasurementTally,
    post: &EdgePosterior,
    notes: &mut Vec<String>,
) -> Vec<f64> {
    let width = prev.len();
    let mut num = vec![0.0; width];
    let mut den = vec![0.0; width];
    let mut row = Vec::new();
    for e in t.entries() {
        post.value_dist(e.i, e.j, &mut row);
        for k in 0..width {
            num[k] += row[k] * e.positives as f64;
            den[k] += row[k] * e.trials as f64;
        }
    }
    let mut held = 0usize;
    let detect = (0..width)
        .map(|k| {
            if den[k] > 0.0 {
                super::clamp_rate(num[k] / den[k])
            } else {
                held += 1;
                prev[k]
            }
        })
        .collect();
    if held > 0 {
        notes.push(format!(
            "held {held} detection rate(s) with no posterior weight"
        ));
    }
    detect
}

pub fn mstep_poisson(
    p: &PoissonParams,
    t: &MeasurementTally,
    post: &EdgePosterior,
    notes: &mut Vec<String>,
) -> Result<PoissonParams> {
    let sweep = sweep_pair_means(post);
    let n = post.n() as f64;
    Ok(PoissonParams {
        edge_mean: sweep.total / (n * n),
        detect: update_detect(&p.detect, t, post, notes),
    })
}

pub fn mstep_config(
    p: &ConfigParams,
    t: &MeasurementTally,
    post: &EdgePosterior,
    notes: &mut Vec<String>,
) -> Result<ConfigParams> {
    let sweep = sweep_pair_means(post);
    let n = post.n() as f64;
    let propensity = if sweep.total > 0.0 {
        sweep
            .row_means
            .iter()
            .map(|&r| n * r / sweep.total)
            .collect()
    } else {
        notes.push("posterior carries no edges; propensities reset to 1".into());
        vec![1.0; post.n()]
    };
    Ok(ConfigParams {
        edge_mean: sweep.total / (n * n),
        detect: update_detect(&p.detect, t, post, notes),
        propensity,
    })
}
