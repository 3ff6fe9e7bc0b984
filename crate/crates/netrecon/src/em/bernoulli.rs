//! EM steps for the Bernoulli graph with a global two-rate error channel.
//!
//! E-step, per measured pair with counts (E, N):
//!
//! ```text
//! Q_ij = ω α^E (1-α)^(N-E) / [ω α^E (1-α)^(N-E) + (1-ω) β^E (1-β)^(N-E)],
//! ```
//!
//! unmeasured pairs sit at the prior density ω. M-step: ω averages Q over
//! all cells, α re-weighs counts by Q, β by 1-Q.

use crate::error::{Error, Result};
use crate::logspace::{log_count_prob, log_sum_exp};
use crate::params::BernoulliParams;
use crate::posterior::EdgePosterior;
use crate::types::MeasurementTally;

use super::clamp_rate;

pub fn estep_bernoulli(p: &BernoulliParams, t: &MeasurementTally) -> Result<EdgePosterior> {
    let lw = p.edge_prob.ln();
    let lnot = (-p.edge_prob).ln_1p();
    let mut keys = Vec::with_capacity(t.entries().len());
    let mut q = Vec::with_capacity(t.entries().len());
    for e in t.entries() {
        let la = lw + log_count_prob(p.true_pos, e.positives, e.trials);
        let lb = lnot + log_count_prob(p.false_pos, e.positives, e.trials);
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
    EdgePosterior::simple(t.index().clone(), t.directed(), keys, q, p.edge_prob)
}

pub fn mstep_bernoulli(
    p: &BernoulliParams,
    t: &MeasurementTally,
    post: &EdgePosterior,
    notes: &mut Vec<String>,
) -> Result<BernoulliParams> {
    let mut sum_q = 0.0;
    let mut hit_pos = 0.0;
    let mut hit_total = 0.0;
    let mut miss_pos = 0.0;
    let mut miss_total = 0.0;
    for e in t.entries() {
        let q = post.edge_prob(e.i, e.j);
        sum_q += q;
        hit_pos += q * e.positives as f64;
        hit_total += q * e.trials as f64;
        miss_pos += (1.0 - q) * e.positives as f64;
        miss_total += (1.0 - q) * e.trials as f64;
    }
    let cells = t.cell_count() as f64;
    let rest = cells - t.entries().len() as f64;
    let edge_prob = clamp_rate((sum_q + rest * p.edge_prob) / cells);
    let true_pos = if hit_total > 0.0 {
        clamp_rate(hit_pos / hit_total)
    } else {
        notes.push("no posterior weight on edges; true-positive rate held".into());
        p.true_pos
    };
    let false_pos = if miss_total > 0.0 {
        clamp_rate(miss_pos / miss_total)
    } else {
        notes.push("no posterior weight on non-edges; false-positive rate held".into());
        p.false_pos
    };
    Ok(BernoulliParams {
        edge_prob,
        true_pos,
        false_pos,
    })
}
