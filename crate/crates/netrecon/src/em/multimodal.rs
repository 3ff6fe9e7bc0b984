//! EM steps for the directed Bernoulli graph measured through several
//! independent data modes, each with its own true- and false-positive
//! rate.
//!
//! E-step, per ordered pair with per-mode counts (E_m, N_m):
//!
//! ```text
//! Q_ij ∝ ω Π_m α_m^E_m (1-α_m)^(N_m-E_m)   vs   (1-ω) Π_m β_m^...,
//! ```
//!
//! a naive-Bayes combination of the modes. M-step: ω averages Q over all
//! ordered cells; each mode's rates re-weigh that mode's counts by Q and
//! 1-Q. With one mode this is exactly the Bernoulli model on a directed
//! graph.

use crate::error::{Error, Result};
use crate::logspace::{log_count_prob, log_sum_exp};
use crate::params::MultimodalParams;
use crate::posterior::EdgePosterior;
use crate::types::MultimodalTally;

use super::clamp_rate;

pub fn estep_multimodal(p: &MultimodalParams, t: &MultimodalTally) -> Result<EdgePosterior> {
    if t.n_modes() != p.true_pos.len() {
        return Err(Error::ModelMismatch(format!(
            "tally has {} modes, params have {}",
            t.n_modes(),
            p.true_pos.len()
        )));
    }
    let lw = p.edge_prob.ln();
    let lnot = (-p.edge_prob).ln_1p();
    let mut keys = Vec::with_capacity(t.entries().len());
    let mut q = Vec::with_capacity(t.entries().len());
    for e in t.entries() {
        let mut la = lw;
        let mut lb = lnot;
        for m in 0..t.n_modes() {
            la += log_count_prob(p.true_pos[m], e.positives[m], e.trials[m]);
            lb += log_count_prob(p.false_pos[m], e.positives[m], e.trials[m]);
        }
        let z = log_sum_exp(&[la, lb]);
        if z == f64::NEG_INFINITY {
            return Err(Error::InvalidInput(format!(
                "pair ({}, {}) is impossible under both edge states",
                e.i, e.j
            )));
        }
        keys.push((e.i, e.j));
        q.push((la - z).exp());
    }
    EdgePosterior::simple(t.index().clone(), true, keys, q, p.edge_prob)
}

pub fn mstep_multimodal(
    p: &MultimodalParams,
    t: &MultimodalTally,
    post: &EdgePosterior,
    notes: &mut Vec<String>,
) -> Result<MultimodalParams> {
    let modes = p.true_pos.len();
    let mut sum_q = 0.0;
    let mut hit_pos = vec![0.0; modes];
    let mut hit_total = vec![0.0; modes];
    let mut miss_pos = vec![0.0; modes];
    let mut miss_total = vec![0.0; modes];
    for e in t.entries() {
        let q = post.edge_prob(e.i, e.j);
        sum_q += q;
        for m in 0..modes {
            hit_pos[m] += q * e.positives[m] as f64;
            hit_total[m] += q * e.trials[m] as f64;
            miss_pos[m] += (1.0 - q) * e.positives[m] as f64;
            miss_total[m] += (1.0 - q) * e.trials[m] as f64;
        }
    }
    let cells = t.cell_count() as f64;
    let rest = cells - t.entries().len() as f64;
    let edge_prob = clamp_rate((sum_q + rest * p.edge_prob) / cells);
    let mut held = 0usize;
    let mut rate = |num: f64, den: f64, prev: f64| {
        if den > 0.0 {
            clamp_rate(num / den)
        } else {
            held += 1;
            prev
        }
    };
    let true_pos = (0..modes)
        .map(|m| rate(hit_pos[m], hit_total[m], p.true_pos[m]))
        .collect();
    let false_pos = (0..modes)
        .map(|m| rate(miss_pos[m], miss_total[m], p.false_pos[m]))
        .collect();
    if held > 0 {
        notes.push(format!("held {held} mode rate(s) with no posterior weight"));
    }
    Ok(MultimodalParams {
        edge_prob,
        true_pos,
        false_pos,
    })
}
