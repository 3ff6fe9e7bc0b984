//! EM steps for the model whose pairs carry one of several interaction
//! types (type 0 meaning none), measured by checks that succeed at a
//! per-type rate.
//!
//! E-step, per measured pair with counts (E, N):
//!
//! ```text
//! Q_ij(m) ∝ ω_m · detect[m]^E (1-detect[m])^(N-E),
//! ```
//!
//! M-step: the type frequencies ω_m average Q(m) over all cells and the
//! per-type detection rates re-weigh counts by Q(m). Type labels are
//! interchangeable in the objective; the driver sorts them by detection
//! rate afterwards.

use crate::error::{Error, Result};
use crate::logspace::{log_count_prob, normalize_log_weights};
use crate::params::EdgeTypesParams;
use crate::posterior::EdgePosterior;
use crate::types::MeasurementTally;

use super::clamp_rate;

pub fn estep_edge_types(p: &EdgeTypesParams, t: &MeasurementTally) -> Result<EdgePosterior> {
    if t.directed() {
        return Err(Error::ModelMismatch(
            "edge-type model takes undirected tallies".into(),
        ));
    }
    let width = p.type_prob.len();
    let lw: Vec<f64> = p.type_prob.iter().map(|&w| w.ln()).collect();
    let mut keys = Vec::with_capacity(t.entries().len());
    let mut rows = Vec::with_capacity(t.entries().len() * width);
    let mut weights = vec![0.0; width];
    for e in t.entries() {
        for m in 0..width {
            weights[m] = lw[m] + log_count_prob(p.detect[m], e.positives, e.trials);
        }
        let z = normalize_log_weights(&mut weights);
        if z == f64::NEG_INFINITY {
            return Err(Error::InvalidInput(format!(
                "pair ({}, {}) is impossible under every edge type",
                e.i, e.j
            )));
        }
        keys.push((e.i, e.j));
        rows.extend_from_slice(&weights);
    }
    EdgePosterior::typed(t.index().clone(), keys, width, rows, p.type_prob.clone())
}

pub fn mstep_edge_types(
    p: &EdgeTypesParams,
    t: &MeasurementTally,
    post: &EdgePosterior,
    notes: &mut Vec<String>,
) -> Result<EdgeTypesParams> {
    let width = p.type_prob.len();
    let mut mass = vec![0.0; width];
    let mut num = vec![0.0; width];
    let mut den = vec![0.0; width];
    let mut row = Vec::new();
    for e in t.entries() {
        post.value_dist(e.i, e.j, &mut row);
        for m in 0..width {
            mass[m] += row[m];
            num[m] += row[m] * e.positives as f64;
            den[m] += row[m] * e.trials as f64;
        }
    }
    let cells = t.cell_count() as f64;
    let rest = cells - t.entries().len() as f64;
    let mut type_prob: Vec<f64> = (0..width)
        .map(|m| clamp_rate((mass[m] + rest * p.type_prob[m]) / cells))
        .collect();
    let total: f64 = type_prob.iter().sum();
    for w in type_prob.iter_mut() {
        *w /= total;
    }
    let mut held = 0usize;
    let detect = (0..width)
        .map(|m| {
            if den[m] > 0.0 {
                clamp_rate(num[m] / den[m])
            } else {
                held += 1;
                p.detect[m]
            }
        })
        .collect();
    if held > 0 {
        notes.push(format!(
            "held {held} detection rate(s) with no posterior weight"
        ));
    }
    Ok(EdgeTypesParams { type_prob, detect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::build_tallies;

    fn params() -> EdgeTypesParams {
        EdgeTypesParams {
            type_prob: vec![0.7, 0.2, 0.1],
            detect: vec![0.05, 0.5, 0.95],
        }
    }

    #[test]
    fn estep_weighs_types_by_frequency_and_fit() {
        let t = build_tallies(&[("a", "b", 1u8), ("a", "b", 1)], false).unwrap();
        let post = estep_edge_types(&params(), &t).unwrap();
        let w: Vec<f64> = vec![
            0.7 * 0.05 * 0.05,
            0.2 * 0.5 * 0.5,
            0.1 * 0.95 * 0.95,
        ];
        let z: f64 = w.iter().sum();
        let mut row = Vec::new();
        post.value_dist(0, 1, &mut row);
        for m in 0..3 {
            assert!((row[m] - w[m] / z).abs() < 1e-15);
        }
    }

    #[test]
    fn unmeasured_pairs_follow_the_type_prior() {
        let t = build_tallies(&[("a", "b", 0u8)], false).unwrap();
        let entries = t.entries().to_vec();
        let big = MeasurementTally::from_entries(
            crate::types::NodeIndex::anonymous(3),
            false,
            entries,
        )
        .unwrap();
        let post = estep_edge_types(&params(), &big).unwrap();
        let mut row = Vec::new();
        post.value_dist(1, 2, &mut row);
        assert_eq!(row, vec![0.7, 0.2, 0.1]);
    }

    #[test]
    fn type_frequencies_stay_normalized() {
        let t = build_tallies(
            &[("a", "b", 1u8), ("a", "c", 0), ("b", "c", 1), ("b", "c", 1)],
            false,
        )
        .unwrap();
        let post = estep_edge_types(&params(), &t).unwrap();
        let mut notes = Vec::new();
        let next = mstep_edge_types(&params(), &t, &post, &mut notes).unwrap();
        assert!((next.type_prob.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(next.type_prob.iter().all(|&w| w > 0.0));
        assert_eq!(next.detect.len(), 3);
    }
}
