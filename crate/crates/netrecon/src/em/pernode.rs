//! EM steps for the survey model: a propensity-weighted multigraph
//! measured by directed per-respondent reports, each node carrying its
//! own report-rate row.
//!
//! E-step, per unordered pair (i, j) with i's counts (E_ij, N_ij) and j's
//! counts (E_ji, N_ji):
//!
//! ```text
//! Q_ij(k) ∝ (μ_ij^k / k!) · r_i[k]^E_ij (1-r_i[k])^(N_ij-E_ij)
//!                         · r_j[k]^E_ji (1-r_j[k])^(N_ji-E_ji),
//! ```
//!
//! M-step: ω and φ as in the other multigraph models; each report rate
//! `r_i[k]` re-weighs node i's own outgoing counts by Q(k) row-wise.

use crate::error::{Error, Result};
use crate::logspace::{log_count_prob, normalize_log_weights};
use crate::models::{fill_mult_log_weights, pair_mean};
use crate::params::PerNodeParams;
use crate::posterior::EdgePosterior;
use crate::types::MeasurementTally;

use super::multiedge::sweep_pair_means;

pub fn estep_per_node(p: &PerNodeParams, t: &MeasurementTally) -> Result<EdgePosterior> {
    let merged = t.merge_directions()?;
    let width = p.report[0].len();
    let mut keys = Vec::with_capacity(merged.len());
    let mut rows = Vec::with_capacity(merged.len() * width);
    let mut terms = vec![0.0; width];
    let mut weights = Vec::with_capacity(width);
    for m in &merged {
        let (ri, rj) = (&p.report[m.i as usize], &p.report[m.j as usize]);
        for k in 0..width {
            terms[k] = log_count_prob(ri[k], m.pos_ij, m.trials_ij)
                + log_count_prob(rj[k], m.pos_ji, m.trials_ji);
        }
        let mu = pair_mean(p.edge_mean, Some(&p.propensity), m.i, m.j);
        fill_mult_log_weights(mu, &terms, &mut weights);
        let z = normalize_log_weights(&mut weights);
        if z == f64::NEG_INFINITY {
            return Err(Error::InvalidInput(format!(
                "pair ({}, {}) is impossible at every multiplicity",
                m.i, m.j
            )));
        }
        keys.push((m.i, m.j));
        rows.extend_from_slice(&weights);
    }
    EdgePosterior::multigraph(
        t.index().clone(),
        keys,
        width,
        rows,
        p.edge_mean,
        Some(p.propensity.clone()),
    )
}

pub fn mstep_per_node(
    p: &PerNodeParams,
    t: &MeasurementTally,
    post: &EdgePosterior,
    notes: &mut Vec<String>,
) -> Result<PerNodeParams> {
    if !t.directed() {
        return Err(Error::ModelMismatch(
            "per-node model takes directed report tallies".into(),
        ));
    }
    let n = post.n();
    let width = p.report[0].len();
    let sweep = sweep_pair_means(post);
    let propensity = if sweep.total > 0.0 {
        sweep
            .row_means
            .iter()
            .map(|&r| n as f64 * r / sweep.total)
            .collect()
    } else {
        notes.push("posterior carries no edges; propensities reset to 1".into());
        vec![1.0; n]
    };
    let mut num = vec![0.0; n * width];
    let mut den = vec![0.0; n * width];
    let mut row = Vec::new();
    for e in t.entries() {
        post.value_dist(e.i, e.j, &mut row);
        let base = e.i as usize * width;
        for k in 0..width {
            num[base + k] += row[k] * e.positives as f64;
            den[base + k] += row[k] * e.trials as f64;
        }
    }
    let mut held = 0usize;
    let report = (0..n)
        .map(|i| {
            (0..width)
                .map(|k| {
                    if den[i * width + k] > 0.0 {
                        super::clamp_rate(num[i * width + k] / den[i * width + k])
                    } else {
                        held += 1;
                        p.report[i][k]
                    }
                })
                .collect()
        })
        .collect();
    if held > 0 {
        notes.push(format!(
            "held {held} report rate(s) with no posterior weight"
        ));
    }
    Ok(PerNodeParams {
        edge_mean: sweep.total / (n * n) as f64,
        propensity,
        report,
    })
}
