//! Exact evaluation of network priors, measurement likelihoods, and the
//! marginal log-posterior objective.
//!
//! Priors and likelihoods both factor over pair cells, so the marginal
//! posterior weight of the parameters,
//!
//! ```text
//! P(D | γ, θ) = Σ_A P(D | A, θ) P(A | γ) = Π_cells Σ_k prior_k(cell) · like_k(cell),
//! ```
//!
//! is a product of per-cell sums. [`log_posterior_objective`] evaluates its
//! log directly; the EM engine maximizes it and the brute-force oracle
//! re-derives it by full enumeration.
//!
//! For the multigraph models the per-cell sum runs over the multiplicities
//! the fit actually carries, `k ∈ 0..detect.len()`, with self-edges pinned
//! to zero; the objective is the evidence of that restricted ensemble. This
//! keeps the EM trace exactly monotone and the enumeration comparison exact
//! at any truncation. For the Bernoulli, multimodal, and edge-type models
//! the cell state space is complete, so unmeasured cells contribute exactly
//! zero and the objective is the full marginal evidence.

use crate::error::{Error, Result};
use crate::logspace::{ln_factorial, log_count_prob, log_sum_exp, StableSum};
use crate::params::{ModelId, ModelParams};
use crate::types::{MeasurementTally, Network, TallyData};

/// Log prior probability `ln P(A | γ)` of a concrete network.
///
/// Zero-probability configurations (an edge under `edge_prob = 0`, a type
/// with `type_prob = 0`) return `-inf`, not an error. Errors are reserved
/// for structural mismatches: wrong directedness, self-loops under a simple
/// model, type values outside the parameter table.
pub fn log_prior(network: &Network, params: &ModelParams) -> Result<f64> {
    check_network_shape(network, params)?;
    match params {
        ModelParams::Bernoulli(p) => simple_graph_log_prior(network, p.edge_prob),
        ModelParams::Multimodal(p) => simple_graph_log_prior(network, p.edge_prob),
        ModelParams::Poisson(p) => Ok(multigraph_log_prior(network, p.edge_mean, None)),
        ModelParams::Config(p) => Ok(multigraph_log_prior(
            network,
            p.edge_mean,
            Some(&p.propensity),
        )),
        ModelParams::PerNode(p) => Ok(multigraph_log_prior(
            network,
            p.edge_mean,
            Some(&p.propensity),
        )),
        ModelParams::EdgeTypes(p) => edge_types_log_prior(network, &p.type_prob),
    }
}

/// Log likelihood `ln P(D | A, θ)` of the tallies given a concrete network.
///
/// Binomial coefficients are omitted (they cancel in every posterior). A
/// rate of exactly 0 or 1 that conflicts with an observed count gives
/// `-inf`.
pub fn log_likelihood(data: &TallyData, network: &Network, params: &ModelParams) -> Result<f64> {
    check_network_shape(network, params)?;
    check_data_shape(data, params)?;
    if data.n() != network.n() {
        return Err(Error::ModelMismatch(format!(
            "tally has {} nodes, network has {}",
            data.n(),
            network.n()
        )));
    }
    match params {
        ModelParams::Bernoulli(p) => {
            let t = data.single()?;
            if t.directed() != network.directed() {
                return Err(Error::ModelMismatch(
                    "tally and network disagree on directedness".into(),
                ));
            }
            let mut ll = 0.0;
            for e in t.entries() {
                let rate = if network.value(e.i, e.j) == 1 {
                    p.true_pos
                } else {
                    p.false_pos
                };
                ll += log_count_prob(rate, e.positives, e.trials);
            }
            Ok(ll)
        }
        ModelParams::Poisson(p) => multiedge_log_likelihood(data.single()?, network, &p.detect),
        ModelParams::Config(p) => multiedge_log_likelihood(data.single()?, network, &p.detect),
        ModelParams::Multimodal(p) => {
            let t = data.modes()?;
            if t.n_modes() != p.true_pos.len() {
                return Err(Error::ModelMismatch(format!(
                    "tally has {} modes, params have {}",
                    t.n_modes(),
                    p.true_pos.len()
                )));
            }
            let mut ll = 0.0;
            for e in t.entries() {
                let edge = network.value(e.i, e.j) == 1;
                for m in 0..t.n_modes() {
                    let rate = if edge { p.true_pos[m] } else { p.false_pos[m] };
                    ll += log_count_prob(rate, e.positives[m], e.trials[m]);
                }
            }
            Ok(ll)
        }
        ModelParams::PerNode(p) => {
            let t = data.single()?;
            if !t.directed() {
                return Err(Error::ModelMismatch(
                    "per-node reports are directed data".into(),
                ));
            }
            let width = p.report[0].len();
            let mut ll = 0.0;
            for e in t.entries() {
                let k = network.value(e.i, e.j) as usize;
                if k >= width {
                    return Err(Error::ModelMismatch(format!(
                        "multiplicity {k} exceeds the report table (max {})",
                        width - 1
                    )));
                }
                ll += log_count_prob(p.report[e.i as usize][k], e.positives, e.trials);
            }
            Ok(ll)
        }
        ModelParams::EdgeTypes(p) => {
            let t = data.single()?;
            let mut ll = 0.0;
            for e in t.entries() {
                let m = network.value(e.i, e.j) as usize;
                if m >= p.detect.len() {
                    return Err(Error::ModelMismatch(format!(
                        "edge type {m} outside the {}-type model",
                        p.detect.len()
                    )));
                }
                ll += log_count_prob(p.detect[m], e.positives, e.trials);
            }
            Ok(ll)
        }
    }
}

/// Log marginal posterior weight of the parameters,
/// `ln Σ_A P(D|A,θ) P(A|γ)`, maximized by the EM engine.
pub fn log_posterior_objective(data: &TallyData, params: &ModelParams) -> Result<f64> {
    check_data_shape(data, params)?;
    params.validate(Some(data.n()))?;
    match params {
        ModelParams::Bernoulli(p) => {
            let t = data.single()?;
            let lw = p.edge_prob.ln();
            let ln_ = (-p.edge_prob).ln_1p();
            let mut obj = StableSum::default();
            for e in t.entries() {
                let la = lw + log_count_prob(p.true_pos, e.positives, e.trials);
                let lb = ln_ + log_count_prob(p.false_pos, e.positives, e.trials);
                obj.add(log_sum_exp(&[la, lb]));
            }
            Ok(obj.value())
        }
        ModelParams::Multimodal(p) => {
            let t = data.modes()?;
            if t.n_modes() != p.true_pos.len() {
                return Err(Error::ModelMismatch(format!(
                    "tally has {} modes, params have {}",
                    t.n_modes(),
                    p.true_pos.len()
                )));
            }
            let lw = p.edge_prob.ln();
            let ln_ = (-p.edge_prob).ln_1p();
            let mut obj = StableSum::default();
            for e in t.entries() {
                let mut la = lw;
                let mut lb = ln_;
                for m in 0..t.n_modes() {
                    la += log_count_prob(p.true_pos[m], e.positives[m], e.trials[m]);
                    lb += log_count_prob(p.false_pos[m], e.positives[m], e.trials[m]);
                }
                obj.add(log_sum_exp(&[la, lb]));
            }
            Ok(obj.value())
        }
        ModelParams::EdgeTypes(p) => {
            let t = data.single()?;
            let lw: Vec<f64> = p.type_prob.iter().map(|w| w.ln()).collect();
            let mut obj = StableSum::default();
            let mut cell = vec![0.0; lw.len()];
            for e in t.entries() {
                for m in 0..lw.len() {
                    cell[m] = lw[m] + log_count_prob(p.detect[m], e.positives, e.trials);
                }
                obj.add(log_sum_exp(&cell));
            }
            Ok(obj.value())
        }
        ModelParams::Poisson(p) => {
            multiedge_objective(data.single()?, p.edge_mean, None, |pos, trials, out| {
                fill_detect_terms(&p.detect, pos, trials, out)
            })
        }
        ModelParams::Config(p) => multiedge_objective(
            data.single()?,
            p.edge_mean,
            Some(&p.propensity),
            |pos, trials, out| fill_detect_terms(&p.detect, pos, trials, out),
        ),
        ModelParams::PerNode(p) => pernode_objective(data.single()?, p),
    }
}

fn check_network_shape(network: &Network, params: &ModelParams) -> Result<()> {
    let model = params.model_id();
    match model {
        ModelId::Multimodal if !network.directed() => {
            return Err(Error::ModelMismatch(
                "multimodal model infers a directed network".into(),
            ));
        }
        ModelId::Poisson | ModelId::Config | ModelId::PerNode | ModelId::EdgeTypes
            if network.directed() =>
        {
            return Err(Error::ModelMismatch(format!(
                "{model} model infers an undirected network"
            )));
        }
        _ => {}
    }
    if matches!(
        model,
        ModelId::Bernoulli | ModelId::Multimodal | ModelId::EdgeTypes
    ) {
        let limit = match params {
            ModelParams::EdgeTypes(p) => p.type_prob.len() as u32 - 1,
            _ => 1,
        };
        for (i, j, v) in network.entries() {
            if i == j {
                return Err(Error::ModelMismatch(format!(
                    "self-loop at node {i} under the {model} model"
                )));
            }
            if v > limit {
                return Err(Error::ModelMismatch(format!(
                    "pair value {v} at ({i}, {j}) exceeds {limit} under the {model} model"
                )));
            }
        }
    }
    let propensity_len = match params {
        ModelParams::Config(p) => Some(p.propensity.len()),
        ModelParams::PerNode(p) => Some(p.propensity.len()),
        _ => None,
    };
    if let Some(len) = propensity_len {
        if len != network.n() {
            return Err(Error::ModelMismatch(format!(
                "propensity table has {len} entries for {} nodes",
                network.n()
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_data_shape(data: &TallyData, params: &ModelParams) -> Result<()> {
    let model = params.model_id();
    match data {
        TallyData::Single(t) => {
            if model == ModelId::Multimodal {
                return Err(Error::ModelMismatch(
                    "multimodal model takes multimodal tallies".into(),
                ));
            }
            match model {
                ModelId::Poisson | ModelId::Config | ModelId::EdgeTypes => {
                    if t.directed() {
                        return Err(Error::ModelMismatch(format!(
                            "{model} model takes undirected tallies"
                        )));
                    }
                }
                ModelId::PerNode => {
                    if !t.directed() {
                        return Err(Error::ModelMismatch(
                            "per-node model takes directed report tallies".into(),
                        ));
                    }
                }
                _ => {}
            }
            Ok(())
        }
        TallyData::Modes(_) => {
            if model != ModelId::Multimodal {
                return Err(Error::ModelMismatch(format!(
                    "{model} model takes single-mode tallies"
                )));
            }
            Ok(())
        }
    }
}

/// `ln P(A|p)` for a simple graph where every cell is an independent
/// Bernoulli(p) edge.
fn simple_graph_log_prior(g: &Network, edge_prob: f64) -> Result<f64> {
    let present = g.entries().count() as f64;
    let absent = cell_total(g.n(), g.directed()) as f64 - present;
    let mut lp = 0.0;
    if present > 0.0 {
        lp += present * edge_prob.ln();
    }
    if absent > 0.0 {
        lp += absent * (-edge_prob).ln_1p();
    }
    Ok(lp)
}

/// `ln P(A|ω,φ)` for the Poisson-family multigraph priors. With `phi` the
/// pair mean is `ω φ_i φ_j` (propensities normalized to mean 1, so the
/// total-mean term is `-n²ω/2` either way); self-loops have mean `ω φ_i²/2`
/// and follow the even-diagonal convention.
fn multigraph_log_prior(g: &Network, edge_mean: f64, phi: Option<&[f64]>) -> f64 {
    let n = g.n() as f64;
    let mut lp = -0.5 * edge_mean * n * n;
    for (i, j, v) in g.entries() {
        if i == j {
            let r = v / 2;
            lp += r as f64 * edge_mean.ln() - r as f64 * 2f64.ln() - ln_factorial(r);
        } else {
            lp += v as f64 * edge_mean.ln() - ln_factorial(v);
        }
        if let Some(phi) = phi {
            lp += v as f64 * (phi[i as usize] * phi[j as usize]).ln() / if i == j { 2.0 } else { 1.0 };
        }
    }
    lp
}

fn edge_types_log_prior(g: &Network, type_prob: &[f64]) -> Result<f64> {
    let mut lp = 0.0;
    let mut typed = 0usize;
    for (_, _, v) in g.entries() {
        lp += type_prob[v as usize].ln();
        typed += 1;
    }
    let base = cell_total(g.n(), g.directed()) - typed;
    if base > 0 {
        lp += base as f64 * type_prob[0].ln();
    }
    Ok(lp)
}

fn multiedge_log_likelihood(
    tally: &MeasurementTally,
    network: &Network,
    detect: &[f64],
) -> Result<f64> {
    if tally.directed() {
        return Err(Error::ModelMismatch(
            "multiedge models take undirected tallies".into(),
        ));
    }
    let mut ll = 0.0;
    for e in tally.entries() {
        let k = network.value(e.i, e.j) as usize;
        if k >= detect.len() {
            return Err(Error::ModelMismatch(format!(
                "multiplicity {k} exceeds the detection table (max {})",
                detect.len() - 1
            )));
        }
        ll += log_count_prob(detect[k], e.positives, e.trials);
    }
    Ok(ll)
}

/// Number of pair cells of an n-node network.
pub(crate) fn cell_total(n: usize, directed: bool) -> usize {
    if directed {
        n * (n - 1)
    } else {
        n * (n - 1) / 2
    }
}

/// Pair prior mean `μ_ij = ω φ_i φ_j` (φ ≡ 1 when absent).
pub(crate) fn pair_mean(edge_mean: f64, phi: Option<&[f64]>, i: u32, j: u32) -> f64 {
    match phi {
        Some(p) => edge_mean * p[i as usize] * p[j as usize],
        None => edge_mean,
    }
}

/// Fills `out[k] = ln P(one pair's counts | multiplicity k)` from a global
/// detection table.
pub(crate) fn fill_detect_terms(detect: &[f64], positives: u32, trials: u32, out: &mut Vec<f64>) {
    out.clear();
    out.extend(
        detect
            .iter()
            .map(|&rate| log_count_prob(rate, positives, trials)),
    );
}

/// Fills `out[k] = k ln μ - ln k! + terms[k]`, the unnormalized log weight
/// of multiplicity k for one pair cell.
pub(crate) fn fill_mult_log_weights(mu: f64, terms: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.push(terms[0]);
    if terms.len() > 1 {
        let lmu = mu.ln();
        for (k, &t) in terms.iter().enumerate().skip(1) {
            out.push(k as f64 * lmu - ln_factorial(k as u32) + t);
        }
    }
}

/// Shared objective for the Poisson-family models: walks every unordered
/// pair cell (measured entries merged in by a single sweep) and sums
/// `ln Σ_k (μ^k/k!) · like_k` plus the `-n²ω/2` total-mean term.
fn multiedge_objective<F>(
    tally: &MeasurementTally,
    edge_mean: f64,
    phi: Option<&[f64]>,
    mut data_terms: F,
) -> Result<f64>
where
    F: FnMut(u32, u32, &mut Vec<f64>),
{
    if tally.directed() {
        return Err(Error::ModelMismatch(
            "multiedge models take undirected tallies".into(),
        ));
    }
    let n = tally.n();
    let width = {
        let mut probe = Vec::new();
        data_terms(0, 0, &mut probe);
        probe.len()
    };
    let base_terms = vec![0.0; width];
    let mut terms = Vec::with_capacity(width);
    let mut weights = Vec::with_capacity(width);
    let mut obj = StableSum::new(-0.5 * edge_mean * (n * n) as f64);
    let entries = tally.entries();
    let mut next = 0usize;
    for (i, j) in crate::types::cells(n, false) {
        let measured = next < entries.len() && (entries[next].i, entries[next].j) == (i, j);
        let cell_terms: &[f64] = if measured {
            let e = &entries[next];
            next += 1;
            data_terms(e.positives, e.trials, &mut terms);
            &terms
        } else {
            &base_terms
        };
        let mu = pair_mean(edge_mean, phi, i, j);
        fill_mult_log_weights(mu, cell_terms, &mut weights);
        obj.add(log_sum_exp(&weights));
    }
    Ok(obj.value())
}

fn pernode_objective(tally: &MeasurementTally, p: &crate::params::PerNodeParams) -> Result<f64> {
    let merged = tally.merge_directions()?;
    let n = tally.n();
    let width = p.report[0].len();
    let mut terms = vec![0.0; width];
    let mut weights = Vec::with_capacity(width);
    let mut obj = StableSum::new(-0.5 * p.edge_mean * (n * n) as f64);
    let mut next = 0usize;
    for (i, j) in crate::types::cells(n, false) {
        terms.fill(0.0);
        if next < merged.len() && (merged[next].i, merged[next].j) == (i, j) {
            let m = &merged[next];
            next += 1;
            for k in 0..width {
                terms[k] = log_count_prob(p.report[i as usize][k], m.pos_ij, m.trials_ij)
                    + log_count_prob(p.report[j as usize][k], m.pos_ji, m.trials_ji);
            }
        }
        let mu = pair_mean(p.edge_mean, Some(&p.propensity), i, j);
        fill_mult_log_weights(mu, &terms, &mut weights);
        obj.add(log_sum_exp(&weights));
    }
    Ok(obj.value())
}
