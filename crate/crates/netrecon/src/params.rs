//! Model identifiers and parameter sets.
//!
//! A model is a pair (network prior, error model). Only the combinations
//! listed in [`ModelId`] are supported; each carries its own parameter
//! struct, collected under [`ModelParams`] for serialization and dispatch.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The supported combinations of network prior and error model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    /// Bernoulli random graph, one global true/false-positive channel.
    Bernoulli,
    /// Poisson multigraph, detection rate per edge multiplicity.
    Poisson,
    /// Degree-weighted multigraph, detection rate per edge multiplicity.
    Config,
    /// Directed Bernoulli graph measured through independent modes.
    Multimodal,
    /// Degree-weighted undirected graph with per-node reporting rates,
    /// measured by directed reports.
    PerNode,
    /// Discrete edge types with one observation rate per type.
    EdgeTypes,
}

impl ModelId {
    pub const ALL: [ModelId; 6] = [
        ModelId::Bernoulli,
        ModelId::Poisson,
        ModelId::Config,
        ModelId::Multimodal,
        ModelId::PerNode,
        ModelId::EdgeTypes,
    ];

    /// Network-prior / error-model tags of the combination.
    pub fn tags(self) -> (&'static str, &'static str) {
        match self {
            ModelId::Bernoulli => ("bernoulli", "independent"),
            ModelId::Poisson => ("poisson", "multiedge"),
            ModelId::Config => ("config", "multiedge"),
            ModelId::Multimodal => ("bernoulli-directed", "multimodal"),
            ModelId::PerNode => ("config", "per-node"),
            ModelId::EdgeTypes => ("edge-types", "edge-types"),
        }
    }

    /// Looks up the combination for a (network prior, error model) pair,
    /// rejecting pairs that have no supported algorithm.
    pub fn from_tags(network: &str, data: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.tags() == (network, data))
            .ok_or_else(|| {
                Error::ModelMismatch(format!(
                    "unsupported model combination ({network} x {data})"
                ))
            })
    }

    /// Whether the inferred network is directed.
    pub fn network_directed(self) -> bool {
        matches!(self, ModelId::Multimodal)
    }

    /// Whether the measurement data are directed (per ordered pair).
    pub fn data_directed(self) -> bool {
        matches!(self, ModelId::Multimodal | ModelId::PerNode)
    }

    /// Whether the model takes multimodal tallies.
    pub fn multimodal_data(self) -> bool {
        matches!(self, ModelId::Multimodal)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Bernoulli => "bernoulli",
            ModelId::Poisson => "poisson",
            ModelId::Config => "config",
            ModelId::Multimodal => "multimodal",
            ModelId::PerNode => "per-node",
            ModelId::EdgeTypes => "edge-types",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(ModelId::Bernoulli),
            "poisson" => Ok(ModelId::Poisson),
            "config" => Ok(ModelId::Config),
            "multimodal" => Ok(ModelId::Multimodal),
            "per-node" | "pernode" => Ok(ModelId::PerNode),
            "edge-types" | "edgetypes" => Ok(ModelId::EdgeTypes),
            _ => Err(Error::InvalidInput(format!("unknown model {s:?}"))),
        }
    }
}

/// Bernoulli random graph with a global measurement channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliParams {
    /// Prior probability that any pair is connected.
    pub edge_prob: f64,
    /// Probability a single check of a true edge comes back positive.
    pub true_pos: f64,
    /// Probability a single check of a non-edge comes back positive.
    pub false_pos: f64,
}

/// Poisson multigraph prior with multiplicity-dependent detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonParams {
    /// Mean multiplicity of each pair.
    pub edge_mean: f64,
    /// `detect[k]`: probability a check fires when the pair has k edges.
    /// The length fixes the truncation: multiplicities run over
    /// `0..detect.len()`. Length 2 is the sparse (simple-graph) fit.
    pub detect: Vec<f64>,
}

/// Degree-weighted multigraph prior: pair `(i, j)` has mean multiplicity
/// `edge_mean · propensity[i] · propensity[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigParams {
    pub edge_mean: f64,
    /// Per-node degree propensity, normalized to mean 1.
    pub propensity: Vec<f64>,
    /// `detect[k]` as in [`PoissonParams`].
    pub detect: Vec<f64>,
}

/// Directed Bernoulli graph measured through M independent modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodalParams {
    pub edge_prob: f64,
    /// Per-mode true-positive rates.
    pub true_pos: Vec<f64>,
    /// Per-mode false-positive rates.
    pub false_pos: Vec<f64>,
}

/// Degree-weighted undirected graph observed through per-node reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerNodeParams {
    pub edge_mean: f64,
    pub propensity: Vec<f64>,
    /// `report[i][k]`: probability node i reports a tie to a node it shares
    /// k edges with. Inner length fixes the multiplicity truncation.
    pub report: Vec<Vec<f64>>,
}

/// Discrete edge types: every pair carries exactly one type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTypesParams {
    /// `type_prob[m]`: prior probability of type m; sums to 1.
    pub type_prob: Vec<f64>,
    /// `detect[m]`: probability a check fires on a pair of type m.
    pub detect: Vec<f64>,
}

/// Parameter set of any supported model, tagged for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelParams {
    Bernoulli(BernoulliParams),
    Poisson(PoissonParams),
    Config(ConfigParams),
    Multimodal(MultimodalParams),
    PerNode(PerNodeParams),
    EdgeTypes(EdgeTypesParams),
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "{name} = {p} is not a probability"
        )));
    }
    Ok(())
}

fn check_probs(name: &str, ps: &[f64]) -> Result<()> {
    for (k, &p) in ps.iter().enumerate() {
        check_prob(&format!("{name}[{k}]"), p)?;
    }
    Ok(())
}

fn check_propensity(phi: &[f64]) -> Result<()> {
    if phi.is_empty() {
        return Err(Error::InvalidInput("empty propensity table".into()));
    }
    let mut mean = 0.0;
    for (i, &p) in phi.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidInput(format!("propensity[{i}] = {p}")));
        }
        mean += p;
    }
    mean /= phi.len() as f64;
    if (mean - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "propensity mean {mean} is not 1"
        )));
    }
    Ok(())
}

fn check_detect(name: &str, detect: &[f64]) -> Result<()> {
    if detect.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "{name} needs at least rates for multiplicities 0 and 1"
        )));
    }
    check_probs(name, detect)
}

impl ModelParams {
    pub fn model_id(&self) -> ModelId {
        match self {
            ModelParams::Bernoulli(_) => ModelId::Bernoulli,
            ModelParams::Poisson(_) => ModelId::Poisson,
            ModelParams::Config(_) => ModelId::Config,
            ModelParams::Multimodal(_) => ModelId::Multimodal,
            ModelParams::PerNode(_) => ModelId::PerNode,
            ModelParams::EdgeTypes(_) => ModelId::EdgeTypes,
        }
    }

    /// Structural validation; `n` checks per-node table sizes when known.
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        match self {
            ModelParams::Bernoulli(p) => {
                check_prob("edge_prob", p.edge_prob)?;
                check_prob("true_pos", p.true_pos)?;
                check_prob("false_pos", p.false_pos)
            }
            ModelParams::Poisson(p) => {
                if !(p.edge_mean.is_finite() && p.edge_mean >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "edge_mean = {}",
                        p.edge_mean
                    )));
                }
                check_detect("detect", &p.detect)
            }
            ModelParams::Config(p) => {
                if !(p.edge_mean.is_finite() && p.edge_mean >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "edge_mean = {}",
                        p.edge_mean
                    )));
                }
                check_propensity(&p.propensity)?;
                if let Some(n) = n {
                    if p.propensity.len() != n {
                        return Err(Error::ModelMismatch(format!(
                            "propensity table has {} entries for {} nodes",
                            p.propensity.len(),
                            n
                        )));
                    }
                }
                check_detect("detect", &p.detect)
            }
            ModelParams::Multimodal(p) => {
                check_prob("edge_prob", p.edge_prob)?;
                if p.true_pos.is_empty() || p.true_pos.len() != p.false_pos.len() {
                    return Err(Error::InvalidInput(
                        "true_pos and false_pos must list the same nonzero number of modes".into(),
                    ));
                }
                check_probs("true_pos", &p.true_pos)?;
                check_probs("false_pos", &p.false_pos)
            }
            ModelParams::PerNode(p) => {
                if !(p.edge_mean.is_finite() && p.edge_mean >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "edge_mean = {}",
                        p.edge_mean
                    )));
                }
                check_propensity(&p.propensity)?;
                if p.report.len() != p.propensity.len() {
                    return Err(Error::ModelMismatch(
                        "report and propensity tables disagree on node count".into(),
                    ));
                }
                if let Some(n) = n {
                    if p.report.len() != n {
                        return Err(Error::ModelMismatch(format!(
                            "report table has {} rows for {} nodes",
                            p.report.len(),
                            n
                        )));
                    }
                }
                let width = p.report.first().map(Vec::len).unwrap_or(0);
                if width < 2 {
                    return Err(Error::InvalidInput(
                        "report rows need rates for multiplicities 0 and 1".into(),
                    ));
                }
                for (i, row) in p.report.iter().enumerate() {
                    if row.len() != width {
                        return Err(Error::InvalidInput(format!(
                            "report row {i} has length {} != {width}",
                            row.len()
                        )));
                    }
                    check_probs(&format!("report[{i}]"), row)?;
                }
                Ok(())
            }
            ModelParams::EdgeTypes(p) => {
                if p.type_prob.len() < 2 {
                    return Err(Error::InvalidInput(
                        "edge-type model needs at least 2 types".into(),
                    ));
                }
                if p.type_prob.len() != p.detect.len() {
                    return Err(Error::InvalidInput(
                        "type_prob and detect must have the same length".into(),
                    ));
                }
                check_probs("type_prob", &p.type_prob)?;
                check_probs("detect", &p.detect)?;
                let total: f64 = p.type_prob.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "type probabilities sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Multiplicity truncation of the Poisson-family models: the largest k
    /// with a detection rate. `None` for the Bernoulli-type models.
    pub fn k_max(&self) -> Option<usize> {
        match self {
            ModelParams::Poisson(p) => Some(p.detect.len() - 1),
            ModelParams::Config(p) => Some(p.detect.len() - 1),
            ModelParams::PerNode(p) => {
                Some(p.report.first().map(Vec::len).unwrap_or(2) - 1)
            }
            _ => None,
        }
    }
}
