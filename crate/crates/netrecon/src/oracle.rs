//! Brute-force posterior by full enumeration, for cross-checking.
//!
//! Walks every network the model ensemble contains, weighs each by
//! `exp(ln P(A|γ) + ln P(D|A,θ))`, and accumulates the exact evidence,
//! per-cell marginals, and functional moments. Each candidate is scored
//! through [`crate::models::log_prior`] and [`crate::models::log_likelihood`]
//! on a concrete [`Network`], so none of the iterative machinery is in the
//! loop. Exponential cost; guarded by a hard cap on the state count.

use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::models::{log_likelihood, log_prior};
use crate::params::ModelParams;
use crate::posterior::EdgePosterior;
use crate::types::{cells, Network, TallyData};

/// Largest number of candidate networks the oracle will enumerate.
pub const MAX_STATES: u64 = 1 << 22;

/// Exact posterior summaries from full enumeration.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub posterior: EdgePosterior,
    /// `ln Σ_A P(D|A,θ) P(A|γ)` over the enumerated ensemble.
    pub log_evidence: f64,
}

struct Space {
    pairs: Vec<(u32, u32)>,
    directed: bool,
    n: usize,
    /// Values each cell ranges over: `0..width`.
    width: u32,
}

/// The ensemble a model puts posterior mass on: every assignment of
/// values to non-self pair cells. Multigraph models are truncated to the
/// multiplicities their detection table covers, matching the fitted
/// posterior's support exactly.
fn state_space(data: &TallyData, params: &ModelParams) -> Result<Space> {
    let n = data.n();
    let directed = params.model_id().network_directed();
    let width = match params {
        ModelParams::Bernoulli(_) | ModelParams::Multimodal(_) => 2,
        ModelParams::Poisson(p) => p.detect.len() as u32,
        ModelParams::Config(p) => p.detect.len() as u32,
        ModelParams::PerNode(p) => p.report[0].len() as u32,
        ModelParams::EdgeTypes(p) => p.type_prob.len() as u32,
    };
    Ok(Space {
        pairs: cells(n, directed).collect(),
        directed,
        n,
        width,
    })
}

fn state_count(space: &Space) -> Result<u64> {
    let mut total: u64 = 1;
    for _ in 0..space.pairs.len() {
        total = total
            .checked_mul(space.width as u64)
            .filter(|&t| t <= MAX_STATES)
            .ok_or_else(|| {
                Error::TooLarge(format!(
                    "enumeration of {} cells with {} values each exceeds {MAX_STATES} states",
                    space.pairs.len(),
                    space.width
                ))
            })?;
    }
    Ok(total)
}

fn network_at(space: &Space, mut idx: u64) -> Network {
    let mut g = Network::empty(space.n, space.directed);
    for &(i, j) in &space.pairs {
        let v = (idx % space.width as u64) as u32;
        idx /= space.width as u64;
        if v > 0 {
            g.set_pair(i, j, v);
        }
    }
    g
}

fn log_weights(data: &TallyData, params: &ModelParams, space: &Space) -> Result<Vec<f64>> {
    let total = state_count(space)?;
    let mut lw = Vec::with_capacity(total as usize);
    for idx in 0..total {
        let g = network_at(space, idx);
        lw.push(log_prior(&g, params)? + log_likelihood(data, &g, params)?);
    }
    Ok(lw)
}

/// Exact per-cell posterior marginals and evidence by enumerating every
/// network in the ensemble.
pub fn enumerate_posterior(data: &TallyData, params: &ModelParams) -> Result<Enumeration> {
    params.validate(Some(data.n()))?;
    let space = state_space(data, params)?;
    let lw = log_weights(data, params, &space)?;
    let log_evidence = log_sum_exp(&lw);
    if log_evidence == f64::NEG_INFINITY {
        return Err(Error::InvalidInput(
            "every candidate network has zero posterior probability".into(),
        ));
    }
    let width = space.width as usize;
    let mut marginals = vec![0.0; space.pairs.len() * width];
    for (idx, &l) in lw.iter().enumerate() {
        let w = (l - log_evidence).exp();
        let mut rest = idx as u64;
        for c in 0..space.pairs.len() {
            let v = (rest % space.width as u64) as usize;
            rest /= space.width as u64;
            marginals[c * width + v] += w;
        }
    }
    for row in marginals.chunks_mut(width) {
        let total: f64 = row.iter().sum();
        for p in row.iter_mut() {
            *p /= total;
        }
    }
    let index = data.index().clone();
    let keys = space.pairs.clone();
    let posterior = match params {
        ModelParams::Bernoulli(p) => {
            let q: Vec<f64> = marginals.chunks(width).map(|r| r[1]).collect();
            EdgePosterior::simple(index, space.directed, keys, q, p.edge_prob)?
        }
        ModelParams::Multimodal(p) => {
            let q: Vec<f64> = marginals.chunks(width).map(|r| r[1]).collect();
            EdgePosterior::simple(index, space.directed, keys, q, p.edge_prob)?
        }
        ModelParams::Poisson(p) => {
            EdgePosterior::multigraph(index, keys, width, marginals, p.edge_mean, None)?
        }
        ModelParams::Config(p) => EdgePosterior::multigraph(
            index,
            keys,
            width,
            marginals,
            p.edge_mean,
            Some(p.propensity.clone()),
        )?,
        ModelParams::PerNode(p) => EdgePosterior::multigraph(
            index,
            keys,
            width,
            marginals,
            p.edge_mean,
            Some(p.propensity.clone()),
        )?,
        ModelParams::EdgeTypes(p) => {
            EdgePosterior::typed(index, keys, width, marginals, p.type_prob.clone())?
        }
    };
    Ok(Enumeration {
        posterior,
        log_evidence,
    })
}

/// Exact posterior mean and variance of an arbitrary network functional,
/// by the same enumeration.
pub fn enumerate_functional<F: FnMut(&Network) -> f64>(
    data: &TallyData,
    params: &ModelParams,
    mut f: F,
) -> Result<(f64, f64)> {
    params.validate(Some(data.n()))?;
    let space = state_space(data, params)?;
    let lw = log_weights(data, params, &space)?;
    let log_evidence = log_sum_exp(&lw);
    if log_evidence == f64::NEG_INFINITY {
        return Err(Error::InvalidInput(
            "every candidate network has zero posterior probability".into(),
        ));
    }
    let mut mean = 0.0;
    let mut second = 0.0;
    for (idx, &l) in lw.iter().enumerate() {
        let w = (l - log_evidence).exp();
        if w == 0.0 {
            continue;
        }
        let x = f(&network_at(&space, idx as u64));
        mean += w * x;
        second += w * x * x;
    }
    Ok((mean, second - mean * mean))
}
