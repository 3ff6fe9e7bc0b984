//! Expectation-maximization for every model family.
//!
//! Each iteration alternates an E-step, which turns the current parameters
//! into the factorized posterior over pair cells, with an M-step, which
//! re-estimates the parameters from that posterior in closed form. The
//! iteration never decreases the marginal log-posterior objective
//! ([`crate::models::log_posterior_objective`]), which the driver records
//! after every update as the fit trace.
//!
//! The objective has symmetric optima in some families (swapping "edge"
//! and "no edge" roles, permuting edge types), so the driver runs several
//! seeded restarts, canonicalizes labels at the end of each, and keeps the
//! restart with the best final objective, breaking exact ties toward the
//! lowest restart index.

pub mod bernoulli;
pub mod edge_types;
pub mod multiedge;
pub mod multimodal;
pub mod pernode;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::log_posterior_objective;
use crate::params::{
    BernoulliParams, ConfigParams, EdgeTypesParams, ModelId, ModelParams, MultimodalParams,
    PerNodeParams, PoissonParams,
};
use crate::posterior::EdgePosterior;
use crate::types::TallyData;

/// Smallest distance any probability parameter keeps from 0 and 1.
pub const RATE_FLOOR: f64 = 1e-12;

/// Knobs for [`run_em`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    /// Convergence threshold on the largest absolute parameter change.
    pub tol: f64,
    /// Iteration cap per restart.
    pub max_iter: usize,
    /// Number of independently initialized runs.
    pub restarts: usize,
    /// Seed shared by all restarts; each restart uses its own stream.
    pub seed: u64,
    /// Multigraph models: track only presence/absence (multiplicities
    /// {0, 1}) instead of counts up to `k_max`.
    pub sparse: bool,
    /// Largest multiplicity carried when `sparse` is off.
    pub k_max: usize,
    /// Number of edge types fitted by the edge-type model.
    pub edge_states: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            restarts: 10,
            seed: 0,
            sparse: true,
            k_max: 3,
            edge_states: 3,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if self.max_iter == 0 || self.restarts == 0 {
            return Err(Error::InvalidInput(
                "need at least one iteration and one restart".into(),
            ));
        }
        if self.k_max == 0 {
            return Err(Error::InvalidInput("k_max must be at least 1".into()));
        }
        if self.edge_states < 2 {
            return Err(Error::InvalidInput("need at least 2 edge states".into()));
        }
        Ok(())
    }

    /// Number of multiplicity values a multigraph fit carries.
    pub fn multiplicity_width(&self) -> usize {
        if self.sparse {
            2
        } else {
            self.k_max + 1
        }
    }
}

/// A fitted model: parameters, their posterior over networks, and how the
/// optimization got there.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: ModelParams,
    pub posterior: EdgePosterior,
    /// Final value of the marginal log-posterior objective.
    pub objective: f64,
    /// Objective after initialization and after every update.
    pub trace: Vec<f64>,
    /// Number of EM updates performed.
    pub iterations: usize,
    /// Whether the parameter change fell below `tol` before `max_iter`.
    pub converged: bool,
    /// Index of the restart that won.
    pub restart: usize,
    /// Human-readable events: held updates, label swaps, resets.
    pub notes: Vec<String>,
}

/// Fits `model` to `data` by EM with seeded restarts.
pub fn run_em(model: ModelId, data: &TallyData, cfg: &EmConfig) -> Result<FitResult> {
    cfg.validate()?;
    if data.n() < 2 {
        return Err(Error::InvalidInput("need at least 2 nodes".into()));
    }
    let mut best: Option<FitResult> = None;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let mut params = init_params(model, data, cfg, &mut rng)?;
        crate::models::check_data_shape(data, &params)?;
        let mut notes = Vec::new();
        let mut trace = vec![log_posterior_objective(data, &params)?];
        let mut flat = Vec::new();
        let mut flat_next = Vec::new();
        flatten(&params, &mut flat);
        let mut converged = false;
        let mut iterations = 0;
        for _ in 0..cfg.max_iter {
            let post = estep(&params, data)?;
            let next = mstep(&params, data, &post, &mut notes)?;
            flatten(&next, &mut flat_next);
            let delta = flat
                .iter()
                .zip(&flat_next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            params = next;
            std::mem::swap(&mut flat, &mut flat_next);
            trace.push(log_posterior_objective(data, &params)?);
            iterations += 1;
            if delta < cfg.tol {
                converged = true;
                break;
            }
        }
        if relabel(&mut params) {
            notes.push("canonicalized state labels".into());
        }
        let posterior = estep(&params, data)?;
        let objective = log_posterior_objective(data, &params)?;
        let candidate = FitResult {
            params,
            posterior,
            objective,
            trace,
            iterations,
            converged,
            restart,
            notes,
        };
        let better = match &best {
            None => true,
            Some(b) => candidate.objective > b.objective,
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Runs one E-step for any model, yielding the posterior its parameters
/// induce. Consistent with [`crate::oracle::enumerate_posterior`] on the
/// same inputs.
pub fn estep(params: &ModelParams, data: &TallyData) -> Result<EdgePosterior> {
    crate::models::check_data_shape(data, params)?;
    match params {
        ModelParams::Bernoulli(p) => bernoulli::estep_bernoulli(p, data.single()?),
        ModelParams::Poisson(p) => multiedge::estep_poisson(p, data.single()?),
        ModelParams::Config(p) => multiedge::estep_config(p, data.single()?),
        ModelParams::Multimodal(p) => multimodal::estep_multimodal(p, data.modes()?),
        ModelParams::PerNode(p) => pernode::estep_per_node(p, data.single()?),
        ModelParams::EdgeTypes(p) => edge_types::estep_edge_types(p, data.single()?),
    }
}

/// Runs one M-step for any model: the closed-form parameter update given
/// the posterior of the previous E-step. Quantities whose posterior
/// weight vanished keep their previous value, with a note.
pub fn mstep(
    params: &ModelParams,
    data: &TallyData,
    post: &EdgePosterior,
    notes: &mut Vec<String>,
) -> Result<ModelParams> {
    crate::models::check_data_shape(data, params)?;
    Ok(match params {
        ModelParams::Bernoulli(p) => {
            ModelParams::Bernoulli(bernoulli::mstep_bernoulli(p, data.single()?, post, notes)?)
        }
        ModelParams::Poisson(p) => {
            ModelParams::Poisson(multiedge::mstep_poisson(p, data.single()?, post, notes)?)
        }
        ModelParams::Config(p) => {
            ModelParams::Config(multiedge::mstep_config(p, data.single()?, post, notes)?)
        }
        ModelParams::Multimodal(p) => ModelParams::Multimodal(multimodal::mstep_multimodal(
            p,
            data.modes()?,
            post,
            notes,
        )?),
        ModelParams::PerNode(p) => {
            ModelParams::PerNode(pernode::mstep_per_node(p, data.single()?, post, notes)?)
        }
        ModelParams::EdgeTypes(p) => ModelParams::EdgeTypes(edge_types::mstep_edge_types(
            p,
            data.single()?,
            post,
            notes,
        )?),
    })
}

/// Clamps a probability away from the boundary so log ratios stay finite.
pub(crate) fn clamp_rate(x: f64) -> f64 {
    x.clamp(RATE_FLOOR, 1.0 - RATE_FLOOR)
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn init_params(
    model: ModelId,
    data: &TallyData,
    cfg: &EmConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ModelParams> {
    let n = data.n();
    Ok(match model {
        ModelId::Bernoulli => ModelParams::Bernoulli(BernoulliParams {
            edge_prob: draw(rng, 0.001, 0.05),
            true_pos: draw(rng, 0.6, 0.95),
            false_pos: draw(rng, 0.001, 0.1),
        }),
        ModelId::Poisson => {
            let edge_mean = draw(rng, 0.001, 0.05);
            ModelParams::Poisson(PoissonParams {
                edge_mean,
                detect: init_detect(cfg.multiplicity_width(), rng),
            })
        }
        ModelId::Config => {
            let edge_mean = draw(rng, 0.001, 0.05);
            let detect = init_detect(cfg.multiplicity_width(), rng);
            ModelParams::Config(ConfigParams {
                edge_mean,
                propensity: vec![1.0; n],
                detect,
            })
        }
        ModelId::Multimodal => {
            let m = match data {
                TallyData::Modes(t) => t.n_modes(),
                TallyData::Single(_) => {
                    return Err(Error::ModelMismatch(
                        "multimodal model takes multimodal tallies".into(),
                    ))
                }
            };
            ModelParams::Multimodal(MultimodalParams {
                edge_prob: draw(rng, 0.001, 0.05),
                true_pos: (0..m).map(|_| draw(rng, 0.6, 0.95)).collect(),
                false_pos: (0..m).map(|_| draw(rng, 0.001, 0.1)).collect(),
            })
        }
        ModelId::PerNode => {
            let edge_mean = draw(rng, 0.001, 0.05);
            let base = init_detect(cfg.multiplicity_width(), rng);
            let report = (0..n)
                .map(|_| {
                    base.iter()
                        .map(|&g| clamp_rate(g * (1.0 + draw(rng, -0.1, 0.1))))
                        .collect()
                })
                .collect();
            ModelParams::PerNode(PerNodeParams {
                edge_mean,
                propensity: vec![1.0; n],
                report,
            })
        }
        ModelId::EdgeTypes => {
            let k = cfg.edge_states;
            let mut type_prob = vec![0.0; k];
            let mut rest = 0.0;
            for w in type_prob.iter_mut().skip(1) {
                *w = draw(rng, 0.001, 0.05);
                rest += *w;
            }
            if rest >= 0.9 {
                for w in type_prob.iter_mut().skip(1) {
                    *w *= 0.5 / rest;
                }
                rest = 0.5;
            }
            type_prob[0] = 1.0 - rest;
            ModelParams::EdgeTypes(EdgeTypesParams {
                type_prob,
                detect: init_detect(k, rng),
            })
        }
    })
}

/// Detection rates for multiplicities 0..width: the zero rate drawn low,
/// every positive multiplicity drawn high.
fn init_detect(width: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut detect = vec![draw(rng, 0.001, 0.1)];
    for _ in 1..width {
        detect.push(draw(rng, 0.6, 0.95));
    }
    detect
}

/// Flattens every continuous parameter for convergence deltas.
fn flatten(params: &ModelParams, out: &mut Vec<f64>) {
    out.clear();
    match params {
        ModelParams::Bernoulli(p) => out.extend([p.edge_prob, p.true_pos, p.false_pos]),
        ModelParams::Poisson(p) => {
            out.push(p.edge_mean);
            out.extend_from_slice(&p.detect);
        }
        ModelParams::Config(p) => {
            out.push(p.edge_mean);
            out.extend_from_slice(&p.detect);
            out.extend_from_slice(&p.propensity);
        }
        ModelParams::Multimodal(p) => {
            out.push(p.edge_prob);
            out.extend_from_slice(&p.true_pos);
            out.extend_from_slice(&p.false_pos);
        }
        ModelParams::PerNode(p) => {
            out.push(p.edge_mean);
            out.extend_from_slice(&p.propensity);
            for row in &p.report {
                out.extend_from_slice(row);
            }
        }
        ModelParams::EdgeTypes(p) => {
            out.extend_from_slice(&p.type_prob);
            out.extend_from_slice(&p.detect);
        }
    }
}

/// Canonicalizes the label symmetry of the final parameters. The swap is
/// an exact symmetry of the objective, so it never changes the fit, only
/// which optimum of an equivalent pair is reported.
fn relabel(params: &mut ModelParams) -> bool {
    match params {
        ModelParams::Bernoulli(p) => {
            if p.true_pos < p.false_pos {
                std::mem::swap(&mut p.true_pos, &mut p.false_pos);
                p.edge_prob = 1.0 - p.edge_prob;
                true
            } else {
                false
            }
        }
        ModelParams::Multimodal(p) => {
            let ta: f64 = p.true_pos.iter().sum();
            let tb: f64 = p.false_pos.iter().sum();
            if ta < tb {
                std::mem::swap(&mut p.true_pos, &mut p.false_pos);
                p.edge_prob = 1.0 - p.edge_prob;
                true
            } else {
                false
            }
        }
        ModelParams::EdgeTypes(p) => {
            let mut order: Vec<usize> = (0..p.detect.len()).collect();
            order.sort_by(|&a, &b| p.detect[a].total_cmp(&p.detect[b]));
            if order.iter().enumerate().all(|(i, &o)| i == o) {
                return false;
            }
            p.detect = order.iter().map(|&o| p.detect[o]).collect();
            p.type_prob = order.iter().map(|&o| p.type_prob[o]).collect();
            true
        }
        _ => false,
    }
}
