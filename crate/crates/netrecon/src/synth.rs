//! Synthetic data generation: draw a network from a model's prior, then
//! simulate repeated noisy measurements of it.
//!
//! Generation is split into two seeded streams (one for the network, one
//! for the observations) so the same ground truth can be re-measured
//! under different plans without re-rolling the network.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::types::{
    cells, MeasurementTally, ModeTallyEntry, MultimodalTally, Network, NodeIndex, TallyData,
    TallyEntry,
};

/// How many times each pair cell gets checked.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TrialPlan {
    /// Every cell (and, for multimodal data, every mode) measured this
    /// many times.
    Uniform(u32),
    /// Multimodal data only: checks per mode, applied to every cell.
    PerMode(Vec<u32>),
}

/// A complete recipe for one synthetic data set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub nodes: usize,
    pub params: ModelParams,
    pub trials: TrialPlan,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::InvalidInput("need at least 2 nodes".into()));
        }
        self.params.validate(Some(self.nodes))?;
        match (&self.trials, &self.params) {
            (TrialPlan::Uniform(0), _) => {
                Err(Error::InvalidInput("trial count must be positive".into()))
            }
            (TrialPlan::PerMode(t), ModelParams::Multimodal(p)) => {
                if t.len() != p.true_pos.len() {
                    Err(Error::InvalidInput(format!(
                        "{} per-mode trial counts for {} modes",
                        t.len(),
                        p.true_pos.len()
                    )))
                } else if t.iter().all(|&c| c == 0) {
                    Err(Error::InvalidInput("trial count must be positive".into()))
                } else {
                    Ok(())
                }
            }
            (TrialPlan::PerMode(_), _) => Err(Error::InvalidInput(
                "per-mode trial counts only apply to multimodal data".into(),
            )),
            _ => Ok(()),
        }
    }
}

fn poisson_u32<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u32
}

fn binomial_u32<R: Rng + ?Sized>(rng: &mut R, trials: u32, rate: f64) -> u32 {
    Binomial::new(trials as u64, rate.clamp(0.0, 1.0))
        .expect("rate in [0, 1]")
        .sample(rng) as u32
}

/// Draws the ground-truth network from the model's prior.
pub fn generate_network(spec: &SynthSpec) -> Result<Network> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(0);
    let n = spec.nodes;
    Ok(match &spec.params {
        ModelParams::Bernoulli(p) => {
            let mut g = Network::empty(n, false);
            for (i, j) in cells(n, false) {
                if rng.random_bool(p.edge_prob) {
                    g.set_pair(i, j, 1);
                }
            }
            g
        }
        ModelParams::Multimodal(p) => {
            let mut g = Network::empty(n, true);
            for (i, j) in cells(n, true) {
                if rng.random_bool(p.edge_prob) {
                    g.set_pair(i, j, 1);
                }
            }
            g
        }
        ModelParams::Poisson(p) => multigraph_network(n, p.edge_mean, None, &mut rng),
        ModelParams::Config(p) => {
            multigraph_network(n, p.edge_mean, Some(&p.propensity), &mut rng)
        }
        ModelParams::PerNode(p) => {
            multigraph_network(n, p.edge_mean, Some(&p.propensity), &mut rng)
        }
        ModelParams::EdgeTypes(p) => {
            let mut g = Network::empty(n, false);
            for (i, j) in cells(n, false) {
                let mut u: f64 = rng.random();
                let mut t = p.type_prob.len() - 1;
                for (m, &w) in p.type_prob.iter().enumerate() {
                    if u < w {
                        t = m;
                        break;
                    }
                    u -= w;
                }
                if t > 0 {
                    g.set_pair(i, j, t as u32);
                }
            }
            g
        }
    })
}

fn multigraph_network<R: Rng + ?Sized>(
    n: usize,
    edge_mean: f64,
    phi: Option<&[f64]>,
    rng: &mut R,
) -> Network {
    let mut g = Network::empty(n, false);
    for (i, j) in cells(n, false) {
        let v = poisson_u32(rng, crate::models::pair_mean(edge_mean, phi, i, j));
        if v > 0 {
            g.set_pair(i, j, v);
        }
    }
    for i in 0..n as u32 {
        let f = phi.map_or(1.0, |p| p[i as usize]);
        let loops = poisson_u32(rng, 0.5 * edge_mean * f * f);
        if loops > 0 {
            g.set_self_loops(i, loops);
        }
    }
    g
}

/// Simulates repeated measurements of `network` under the model's error
/// channel. Every pair cell is checked; a true multiplicity beyond the
/// detection table is measured at the table's last rate.
pub fn generate_observations(spec: &SynthSpec, network: &Network) -> Result<TallyData> {
    spec.validate()?;
    if network.n() != spec.nodes {
        return Err(Error::InvalidInput(format!(
            "network has {} nodes, spec wants {}",
            network.n(),
            spec.nodes
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let n = spec.nodes;
    let index = NodeIndex::anonymous(n);
    let uniform = match &spec.trials {
        TrialPlan::Uniform(t) => Some(*t),
        TrialPlan::PerMode(_) => None,
    };
    match &spec.params {
        ModelParams::Bernoulli(p) => {
            let trials = uniform.unwrap();
            let mut entries = Vec::new();
            for (i, j) in cells(n, false) {
                let rate = if network.value(i, j) >= 1 {
                    p.true_pos
                } else {
                    p.false_pos
                };
                entries.push(TallyEntry {
                    i,
                    j,
                    trials,
                    positives: binomial_u32(&mut rng, trials, rate),
                });
            }
            Ok(TallyData::Single(MeasurementTally::from_entries(
                index, false, entries,
            )?))
        }
        ModelParams::Multimodal(p) => {
            let counts: Vec<u32> = match &spec.trials {
                TrialPlan::Uniform(t) => vec![*t; p.true_pos.len()],
                TrialPlan::PerMode(t) => t.clone(),
            };
            let modes = (0..p.true_pos.len()).map(|m| format!("m{m}")).collect();
            let mut entries = Vec::new();
            for (i, j) in cells(n, true) {
                let edge = network.value(i, j) >= 1;
                let positives = counts
                    .iter()
                    .enumerate()
                    .map(|(m, &t)| {
                        let rate = if edge { p.true_pos[m] } else { p.false_pos[m] };
                        binomial_u32(&mut rng, t, rate)
                    })
                    .collect();
                entries.push(ModeTallyEntry {
                    i,
                    j,
                    trials: counts.clone(),
                    positives,
                });
            }
            Ok(TallyData::Modes(MultimodalTally::from_entries(
                index, modes, entries,
            )?))
        }
        ModelParams::Poisson(p) => Ok(TallyData::Single(detect_table_observations(
            network, &p.detect, uniform.unwrap(), index, &mut rng,
        )?)),
        ModelParams::Config(p) => Ok(TallyData::Single(detect_table_observations(
            network, &p.detect, uniform.unwrap(), index, &mut rng,
        )?)),
        ModelParams::EdgeTypes(p) => Ok(TallyData::Single(detect_table_observations(
            network, &p.detect, uniform.unwrap(), index, &mut rng,
        )?)),
        ModelParams::PerNode(p) => {
            let trials = uniform.unwrap();
            let width = p.report[0].len();
            let mut entries = Vec::new();
            for (i, j) in cells(n, true) {
                let k = (network.value(i, j) as usize).min(width - 1);
                entries.push(TallyEntry {
                    i,
                    j,
                    trials,
                    positives: binomial_u32(&mut rng, trials, p.report[i as usize][k]),
                });
            }
            Ok(TallyData::Single(MeasurementTally::from_entries(
                index, true, entries,
            )?))
        }
    }
}

fn detect_table_observations<R: Rng + ?Sized>(
    network: &Network,
    detect: &[f64],
    trials: u32,
    index: NodeIndex,
    rng: &mut R,
) -> Result<MeasurementTally> {
    let n = index.len();
    let mut entries = Vec::new();
    for (i, j) in cells(n, false) {
        let k = (network.value(i, j) as usize).min(detect.len() - 1);
        entries.push(TallyEntry {
            i,
            j,
            trials,
            positives: binomial_u32(rng, trials, detect[k]),
        });
    }
    MeasurementTally::from_entries(index, false, entries)
}

/// Draws the network and its measurements in one go.
pub fn generate(spec: &SynthSpec) -> Result<(Network, TallyData)> {
    let network = generate_network(spec)?;
    let data = generate_observations(spec, &network)?;
    Ok((network, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::*;

    fn bern_spec(seed: u64) -> SynthSpec {
        SynthSpec {
            nodes: 40,
            params: ModelParams::Bernoulli(BernoulliParams {
                edge_prob: 0.2,
                true_pos: 0.9,
                false_pos: 0.05,
            }),
            trials: TrialPlan::Uniform(3),
            seed,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let (g1, d1) = generate(&bern_spec(5)).unwrap();
        let (g2, d2) = generate(&bern_spec(5)).unwrap();
        assert_eq!(
            g1.entries().collect::<Vec<_>>(),
            g2.entries().collect::<Vec<_>>()
        );
        assert_eq!(d1.single().unwrap().entries(), d2.single().unwrap().entries());
        let (g3, _) = generate(&bern_spec(6)).unwrap();
        assert_ne!(
            g1.entries().collect::<Vec<_>>(),
            g3.entries().collect::<Vec<_>>()
        );
    }

    #[test]
    fn edge_density_tracks_the_prior() {
        let mut spec = bern_spec(1);
        spec.nodes = 120;
        let g = generate_network(&spec).unwrap();
        let cells_total = 120 * 119 / 2;
        let density = g.entries().count() as f64 / cells_total as f64;
        // 5 sigma around 0.2.
        assert!((density - 0.2).abs() < 5.0 * (0.2f64 * 0.8 / cells_total as f64).sqrt());
    }

    #[test]
    fn observation_rates_follow_the_channel() {
        let spec = SynthSpec {
            nodes: 60,
            trials: TrialPlan::Uniform(5),
            seed: 9,
            params: ModelParams::Bernoulli(BernoulliParams {
                edge_prob: 0.5,
                true_pos: 1.0,
                false_pos: 0.0,
            }),
        };
        let (g, d) = generate(&spec).unwrap();
        for e in d.single().unwrap().entries() {
            if g.value(e.i, e.j) == 1 {
                assert_eq!(e.positives, e.trials);
            } else {
                assert_eq!(e.positives, 0);
            }
        }
    }

    #[test]
    fn per_mode_counts_differ_by_mode() {
        let spec = SynthSpec {
            nodes: 10,
            trials: TrialPlan::PerMode(vec![4, 0, 2]),
            seed: 2,
            params: ModelParams::Multimodal(MultimodalParams {
                edge_prob: 0.1,
                true_pos: vec![0.9, 0.8, 0.7],
                false_pos: vec![0.01, 0.02, 0.03],
            }),
        };
        let (_, d) = generate(&spec).unwrap();
        let t = d.modes().unwrap();
        assert_eq!(t.entries()[0].trials, vec![4, 0, 2]);
        assert!(t.entries().iter().all(|e| e.positives[1] == 0));
    }

    #[test]
    fn per_node_reports_are_directed_rows() {
        let spec = SynthSpec {
            nodes: 8,
            trials: TrialPlan::Uniform(2),
            seed: 3,
            params: ModelParams::PerNode(PerNodeParams {
                edge_mean: 0.4,
                propensity: vec![1.0; 8],
                report: vec![vec![0.0, 1.0]; 8],
            }),
        };
        let (g, d) = generate(&spec).unwrap();
        let t = d.single().unwrap();
        assert!(t.directed());
        assert_eq!(t.entries().len(), 8 * 7);
        for e in t.entries() {
            let k = g.value(e.i, e.j).min(1);
            assert_eq!(e.positives, k * e.trials);
        }
    }

    #[test]
    fn multigraph_truth_can_hold_self_loops() {
        let spec = SynthSpec {
            nodes: 30,
            trials: TrialPlan::Uniform(1),
            seed: 4,
            params: ModelParams::Poisson(PoissonParams {
                edge_mean: 2.0,
                detect: vec![0.05, 0.9],
            }),
        };
        let g = generate_network(&spec).unwrap();
        let loops: u32 = (0..30).map(|i| g.self_loops(i)).sum();
        assert!(loops > 0);
        let d = generate_observations(&spec, &g).unwrap();
        assert_eq!(d.single().unwrap().entries().len(), 30 * 29 / 2);
    }
}
