//! Factorized posterior over pair cells and estimators built on it.
//!
//! Given parameters, the posterior over networks factorizes across pair
//! cells. [`EdgePosterior`] stores one categorical distribution per
//! *measured* cell and a rule for the unmeasured rest, so memory stays
//! O(measured + n) even when the pair set is huge. Functionals of the
//! network (mean degree, counts in a certainty band) are then either
//! computed in closed form by sweeping cells, or estimated by Monte Carlo
//! with [`sample_network`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::params::{ModelParams, PerNodeParams};
use crate::types::{cells, MeasurementTally, Network, NodeIndex};

/// What a pair cell's value means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosteriorKind {
    /// Values in {0, 1}: edge absent or present.
    Simple,
    /// Values are edge multiplicities 0..width.
    Multigraph,
    /// Values are interaction types 0..width, type 0 meaning none.
    Typed,
}

#[derive(Debug, Clone)]
enum Mass {
    /// Per stored cell, the probability the edge is present.
    Edge(Vec<f64>),
    /// Per stored cell, a categorical distribution over values; `data` is
    /// row-major with `width` columns.
    Rows { width: usize, data: Vec<f64> },
}

#[derive(Debug, Clone)]
enum Implicit {
    Edge(f64),
    Categorical(Vec<f64>),
    /// Truncated Poisson over 0..width with pair mean `ω φ_i φ_j`.
    PoissonTrunc {
        edge_mean: f64,
        phi: Option<Vec<f64>>,
        width: usize,
    },
}

/// Posterior marginal distribution of every pair cell of a network.
#[derive(Debug, Clone)]
pub struct EdgePosterior {
    index: NodeIndex,
    directed: bool,
    kind: PosteriorKind,
    keys: Vec<(u32, u32)>,
    mass: Mass,
    implicit: Implicit,
}

impl EdgePosterior {
    /// Posterior for a simple-graph model: `q` per stored cell, a constant
    /// probability (normally the prior density) everywhere else.
    pub fn simple(
        index: NodeIndex,
        directed: bool,
        keys: Vec<(u32, u32)>,
        q: Vec<f64>,
        unmeasured_q: f64,
    ) -> Result<Self> {
        check_keys(&keys, index.len(), directed, q.len())?;
        for &v in q.iter().chain(std::iter::once(&unmeasured_q)) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "edge probability {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            index,
            directed,
            kind: PosteriorKind::Simple,
            keys,
            mass: Mass::Edge(q),
            implicit: Implicit::Edge(unmeasured_q),
        })
    }

    /// Posterior for a multigraph model: a multiplicity distribution per
    /// stored cell, truncated-Poisson prior cells elsewhere.
    pub fn multigraph(
        index: NodeIndex,
        keys: Vec<(u32, u32)>,
        width: usize,
        rows: Vec<f64>,
        edge_mean: f64,
        phi: Option<Vec<f64>>,
    ) -> Result<Self> {
        check_rows(&keys, index.len(), false, width, &rows)?;
        if let Some(p) = &phi {
            if p.len() != index.len() {
                return Err(Error::InvalidInput(format!(
                    "{} propensities for {} nodes",
                    p.len(),
                    index.len()
                )));
            }
        }
        Ok(Self {
            index,
            directed: false,
            kind: PosteriorKind::Multigraph,
            keys,
            mass: Mass::Rows { width, data: rows },
            implicit: Implicit::PoissonTrunc {
                edge_mean,
                phi,
                width,
            },
        })
    }

    /// Posterior for the edge-type model: a type distribution per stored
    /// cell, the prior type distribution elsewhere.
    pub fn typed(
        index: NodeIndex,
        keys: Vec<(u32, u32)>,
        width: usize,
        rows: Vec<f64>,
        type_prob: Vec<f64>,
    ) -> Result<Self> {
        check_rows(&keys, index.len(), false, width, &rows)?;
        if type_prob.len() != width {
            return Err(Error::InvalidInput(format!(
                "{} type probabilities for width {width}",
                type_prob.len()
            )));
        }
        Ok(Self {
            index,
            directed: false,
            kind: PosteriorKind::Typed,
            keys,
            mass: Mass::Rows { width, data: rows },
            implicit: Implicit::Categorical(type_prob),
        })
    }

    pub fn n(&self) -> usize {
        self.index.len()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn index(&self) -> &NodeIndex {
        &self.index
    }

    pub fn kind(&self) -> PosteriorKind {
        self.kind
    }

    /// Number of pair cells with an explicitly stored distribution.
    pub fn stored_len(&self) -> usize {
        self.keys.len()
    }

    /// Total number of pair cells.
    pub fn cell_count(&self) -> usize {
        crate::models::cell_total(self.n(), self.directed)
    }

    /// Number of values a cell distribution ranges over.
    pub fn width(&self) -> usize {
        match &self.mass {
            Mass::Edge(_) => 2,
            Mass::Rows { width, .. } => *width,
        }
    }

    fn position(&self, i: u32, j: u32) -> Option<usize> {
        let key = crate::types::canonical_pair(i, j, self.directed);
        self.keys.binary_search(&key).ok()
    }

    /// Probability that the pair carries any connection at all.
    pub fn edge_prob(&self, i: u32, j: u32) -> f64 {
        match self.position(i, j) {
            Some(c) => match &self.mass {
                Mass::Edge(q) => q[c],
                Mass::Rows { width, data } => 1.0 - data[c * width],
            },
            None => match &self.implicit {
                Implicit::Edge(q) => *q,
                Implicit::Categorical(p) => 1.0 - p[0],
                Implicit::PoissonTrunc { .. } => {
                    let mut row = Vec::new();
                    self.implicit_row(i, j, &mut row);
                    1.0 - row[0]
                }
            },
        }
    }

    /// Fills `out[k]` with the posterior probability of value `k`.
    pub fn value_dist(&self, i: u32, j: u32, out: &mut Vec<f64>) {
        match self.position(i, j) {
            Some(c) => match &self.mass {
                Mass::Edge(q) => {
                    out.clear();
                    out.extend([1.0 - q[c], q[c]]);
                }
                Mass::Rows { width, data } => {
                    out.clear();
                    out.extend_from_slice(&data[c * width..(c + 1) * width]);
                }
            },
            None => self.implicit_row(i, j, out),
        }
    }

    fn implicit_row(&self, i: u32, j: u32, out: &mut Vec<f64>) {
        match &self.implicit {
            Implicit::Edge(q) => {
                out.clear();
                out.extend([1.0 - q, *q]);
            }
            Implicit::Categorical(p) => {
                out.clear();
                out.extend_from_slice(p);
            }
            Implicit::PoissonTrunc {
                edge_mean,
                phi,
                width,
            } => {
                let mu = crate::models::pair_mean(*edge_mean, phi.as_deref(), i, j);
                out.clear();
                let mut term = 1.0;
                let mut total = 0.0;
                for k in 0..*width {
                    if k > 0 {
                        term *= mu / k as f64;
                    }
                    out.push(term);
                    total += term;
                }
                for v in out.iter_mut() {
                    *v /= total;
                }
            }
        }
    }

    /// True when every unmeasured cell shares one distribution.
    pub fn implicit_is_constant(&self) -> bool {
        !matches!(
            &self.implicit,
            Implicit::PoissonTrunc { phi: Some(_), .. }
        )
    }

    /// Pair cells without a stored row, in `(i, j)` order.
    pub fn unmeasured(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let mut next = 0usize;
        cells(self.n(), self.directed).filter(move |&cell| {
            if next < self.keys.len() && self.keys[next] == cell {
                next += 1;
                false
            } else {
                true
            }
        })
    }

    /// Stored cells in `(i, j)` order with their any-edge probability.
    pub fn stored(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.keys.iter().enumerate().map(move |(c, &(i, j))| {
            let q = match &self.mass {
                Mass::Edge(q) => q[c],
                Mass::Rows { width, data } => 1.0 - data[c * width],
            };
            (i, j, q)
        })
    }

    /// Mean and variance of one cell's degree contribution: the value for
    /// simple and multigraph cells, presence (value ≠ 0) for typed cells.
    pub fn contribution_moments(&self, row: &[f64]) -> (f64, f64) {
        match self.kind {
            PosteriorKind::Simple | PosteriorKind::Typed => {
                let p = 1.0 - row[0];
                (p, p * (1.0 - p))
            }
            PosteriorKind::Multigraph => {
                let mut m1 = 0.0;
                let mut m2 = 0.0;
                for (k, &p) in row.iter().enumerate() {
                    m1 += k as f64 * p;
                    m2 += (k * k) as f64 * p;
                }
                (m1, m2 - m1 * m1)
            }
        }
    }

    /// Sums `f(mean, var)` of the contribution moments over every pair
    /// cell, exploiting a constant unmeasured distribution when possible.
    fn sweep_moments(&self) -> (f64, f64) {
        let mut sum_mean = 0.0;
        let mut sum_var = 0.0;
        let mut row = Vec::new();
        for c in 0..self.keys.len() {
            self.row_at(c, &mut row);
            let (m, v) = self.contribution_moments(&row);
            sum_mean += m;
            sum_var += v;
        }
        let rest = self.cell_count() - self.keys.len();
        if rest == 0 {
            return (sum_mean, sum_var);
        }
        if self.implicit_is_constant() {
            self.implicit_row(0, 1, &mut row);
            let (m, v) = self.contribution_moments(&row);
            sum_mean += rest as f64 * m;
            sum_var += rest as f64 * v;
        } else {
            let mut next = 0usize;
            for (i, j) in cells(self.n(), self.directed) {
                if next < self.keys.len() && self.keys[next] == (i, j) {
                    next += 1;
                    continue;
                }
                self.implicit_row(i, j, &mut row);
                let (m, v) = self.contribution_moments(&row);
                sum_mean += m;
                sum_var += v;
            }
        }
        (sum_mean, sum_var)
    }

    fn row_at(&self, c: usize, out: &mut Vec<f64>) {
        match &self.mass {
            Mass::Edge(q) => {
                out.clear();
                out.extend([1.0 - q[c], q[c]]);
            }
            Mass::Rows { width, data } => {
                out.clear();
                out.extend_from_slice(&data[c * width..(c + 1) * width]);
            }
        }
    }
}

fn check_keys(keys: &[(u32, u32)], n: usize, directed: bool, mass_len: usize) -> Result<()> {
    if mass_len != keys.len() {
        return Err(Error::InvalidInput(format!(
            "{mass_len} distributions for {} cells",
            keys.len()
        )));
    }
    let n = n as u32;
    for w in keys.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidInput("cells out of order".into()));
        }
    }
    for &(i, j) in keys {
        if i == j || i >= n || j >= n || (!directed && i > j) {
            return Err(Error::InvalidInput(format!("bad cell ({i}, {j})")));
        }
    }
    Ok(())
}

fn check_rows(
    keys: &[(u32, u32)],
    n: usize,
    directed: bool,
    width: usize,
    rows: &[f64],
) -> Result<()> {
    check_keys(keys, n, directed, rows.len() / width.max(1))?;
    if width < 2 {
        return Err(Error::InvalidInput("cell distributions need width >= 2".into()));
    }
    if rows.len() != keys.len() * width {
        return Err(Error::InvalidInput(format!(
            "{} row values for {} cells of width {width}",
            rows.len(),
            keys.len()
        )));
    }
    for row in rows.chunks(width) {
        let total: f64 = row.iter().sum();
        if row.iter().any(|&p| !(0.0..=1.0 + 1e-9).contains(&p)) || (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "cell distribution does not normalize (sum {total})"
            )));
        }
    }
    Ok(())
}

/// A closed-form posterior mean with its posterior standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalEstimate {
    pub value: f64,
    pub std_dev: f64,
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Posterior mean and standard deviation of the network's mean degree.
///
/// Each pair cell contributes its value (multiplicity for multigraph
/// models, presence for simple and typed models); an undirected pair feeds
/// both endpoints, a directed cell counts once. Cells are independent
/// under the factorized posterior, so the variance is the sum of cell
/// variances times the squared weight of a cell: `(2/n)²` undirected,
/// `(1/n)²` directed.
pub fn mean_degree(posterior: &EdgePosterior) -> FunctionalEstimate {
    let (sum_mean, sum_var) = posterior.sweep_moments();
    let n = posterior.n() as f64;
    let weight = if posterior.directed() { 1.0 } else { 2.0 };
    FunctionalEstimate {
        value: weight * sum_mean / n,
        std_dev: (weight * weight * sum_var).sqrt() / n,
    }
}

/// Mean degree of one concrete network drawn from a posterior of the given
/// kind. Values count like [`mean_degree`]'s closed form: multiplicities
/// for multigraph draws, presence for simple and typed ones, so the two
/// estimates converge to the same quantity.
pub fn network_mean_degree(kind: PosteriorKind, g: &Network) -> f64 {
    let weight = if g.directed() { 1.0 } else { 2.0 };
    let edges = match kind {
        PosteriorKind::Typed => g.entries().count() as f64,
        _ => g.edge_count() as f64,
    };
    weight * edges / g.n() as f64
}

/// Draws one network from the factorized posterior. Self-loops never
/// appear: the posterior's support excludes them.
pub fn sample_network<R: Rng + ?Sized>(posterior: &EdgePosterior, rng: &mut R) -> Network {
    let mut g = Network::empty(posterior.n(), posterior.directed());
    let mut row = Vec::new();
    let constant = posterior.implicit_is_constant();
    let mut const_row = Vec::new();
    if constant && posterior.cell_count() > posterior.stored_len() {
        posterior.implicit_row(0, 1, &mut const_row);
    }
    let mut next = 0usize;
    for (i, j) in cells(posterior.n(), posterior.directed()) {
        let dist: &[f64] = if next < posterior.stored_len() && posterior.keys[next] == (i, j) {
            posterior.row_at(next, &mut row);
            next += 1;
            &row
        } else if constant {
            &const_row
        } else {
            posterior.implicit_row(i, j, &mut row);
            &row
        };
        let mut u: f64 = rng.random();
        let mut value = dist.len() - 1;
        for (k, &p) in dist.iter().enumerate() {
            if u < p {
                value = k;
                break;
            }
            u -= p;
        }
        if value > 0 {
            g.set_pair(i, j, value as u32);
        }
    }
    g
}

/// Most probable network at a presence threshold: a pair is kept when its
/// any-edge probability strictly exceeds `threshold`, with the most
/// probable nonzero value (lowest value on ties).
pub fn map_network(posterior: &EdgePosterior, threshold: f64) -> Network {
    let mut g = Network::empty(posterior.n(), posterior.directed());
    let mut row = Vec::new();
    for (i, j) in cells(posterior.n(), posterior.directed()) {
        posterior.value_dist(i, j, &mut row);
        if 1.0 - row[0] > threshold {
            let mut best = 1usize;
            for k in 2..row.len() {
                if row[k] > row[best] {
                    best = k;
                }
            }
            g.set_pair(i, j, best as u32);
        }
    }
    g
}

/// Monte Carlo posterior mean of `f` over sampled networks.
pub fn estimate_functional<F: FnMut(&Network) -> f64>(
    posterior: &EdgePosterior,
    samples: usize,
    seed: u64,
    mut f: F,
) -> Result<MonteCarloEstimate> {
    if samples < 2 {
        return Err(Error::InvalidInput(
            "need at least 2 samples for a standard error".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for _ in 0..samples {
        let g = sample_network(posterior, &mut rng);
        let x = f(&g);
        s1 += x;
        s2 += x * x;
    }
    let m = samples as f64;
    let mean = s1 / m;
    let var = ((s2 - s1 * s1 / m) / (m - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / m).sqrt(),
        samples,
    })
}

/// Cell counts below, inside, and above a posterior certainty band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertaintyBand {
    /// Cells with edge probability below the low cut: confidently absent.
    pub confident_absent: usize,
    /// Cells inside `[low, high]`: genuinely uncertain.
    pub uncertain: usize,
    /// Cells above the high cut: confidently present.
    pub confident_present: usize,
}

/// Splits all pair cells by any-edge probability at `low` and `high`.
pub fn certainty_band(posterior: &EdgePosterior, low: f64, high: f64) -> Result<CertaintyBand> {
    if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high {
        return Err(Error::InvalidInput(format!(
            "bad certainty band [{low}, {high}]"
        )));
    }
    let mut band = CertaintyBand {
        confident_absent: 0,
        uncertain: 0,
        confident_present: 0,
    };
    let mut tally = |q: f64| {
        if q < low {
            band.confident_absent += 1;
        } else if q > high {
            band.confident_present += 1;
        } else {
            band.uncertain += 1;
        }
    };
    for (_, _, q) in posterior.stored() {
        tally(q);
    }
    let rest = posterior.cell_count() - posterior.stored_len();
    if rest > 0 {
        if posterior.implicit_is_constant() {
            let q = {
                let mut row = Vec::new();
                posterior.implicit_row(0, 1, &mut row);
                1.0 - row[0]
            };
            for _ in 0..rest {
                tally(q);
            }
        } else {
            let mut next = 0usize;
            let keys = &posterior.keys;
            let mut row = Vec::new();
            for (i, j) in cells(posterior.n(), posterior.directed()) {
                if next < keys.len() && keys[next] == (i, j) {
                    next += 1;
                    continue;
                }
                posterior.implicit_row(i, j, &mut row);
                tally(1.0 - row[0]);
            }
        }
    }
    Ok(band)
}

/// Posterior false-discovery rate of a single positive report in each
/// mode: the probability the pair has no edge given one positive check.
/// A mode nobody could trigger (zero numerator and denominator) reports 0.
pub fn false_discovery_rate(params: &ModelParams) -> Result<Vec<f64>> {
    let one = |edge_prob: f64, true_pos: f64, false_pos: f64| {
        let hit = edge_prob * true_pos;
        let miss = (1.0 - edge_prob) * false_pos;
        if hit + miss == 0.0 {
            0.0
        } else {
            miss / (hit + miss)
        }
    };
    match params {
        ModelParams::Bernoulli(p) => Ok(vec![one(p.edge_prob, p.true_pos, p.false_pos)]),
        ModelParams::Multimodal(p) => Ok(p
            .true_pos
            .iter()
            .zip(&p.false_pos)
            .map(|(&a, &b)| one(p.edge_prob, a, b))
            .collect()),
        _ => Err(Error::ModelMismatch(
            "false discovery rate needs a present/absent error model".into(),
        )),
    }
}

/// Precision of each reporter's positive claims: for node i, the average
/// over distinct nodes j that i ever reported as connected of the
/// probability the edge is real, `μ_ij α_i / (μ_ij α_i + β_i)` with prior
/// pair mean `μ_ij = ω φ_i φ_j`, one-report rate `α_i = report[i][1]` and
/// false-report rate `β_i = report[i][0]`. Nodes that never made a
/// positive claim get `None`.
pub fn reporter_precision(
    params: &PerNodeParams,
    tally: &MeasurementTally,
) -> Result<Vec<Option<f64>>> {
    if !tally.directed() {
        return Err(Error::ModelMismatch(
            "reporter precision needs directed report tallies".into(),
        ));
    }
    if params.propensity.len() != tally.n() {
        return Err(Error::ModelMismatch(format!(
            "params describe {} nodes, tally has {}",
            params.propensity.len(),
            tally.n()
        )));
    }
    let n = tally.n();
    let mut sums = vec![(0.0, 0usize); n];
    for e in tally.entries() {
        if e.positives == 0 {
            continue;
        }
        let i = e.i as usize;
        let mu = params.edge_mean * params.propensity[i] * params.propensity[e.j as usize];
        let hit = mu * params.report[i][1];
        let miss = params.report[i][0];
        let p = if hit + miss == 0.0 { 0.0 } else { hit / (hit + miss) };
        sums[i].0 += p;
        sums[i].1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(total, count)| (count > 0).then(|| total / count as f64))
        .collect())
}

/// Mean degree of the network obtained by declaring an edge wherever at
/// least `min_positives` checks came back positive, the standard
/// plug-in estimate that ignores measurement error.
pub fn naive_mean_degree(tally: &MeasurementTally, min_positives: u32) -> f64 {
    let edges = tally
        .entries()
        .iter()
        .filter(|e| e.positives >= min_positives.max(1))
        .count() as f64;
    let weight = if tally.directed() { 1.0 } else { 2.0 };
    weight * edges / tally.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_post(q: Vec<f64>, unmeasured: f64, n: usize) -> EdgePosterior {
        let keys: Vec<(u32, u32)> = cells(n, false).take(q.len()).collect();
        EdgePosterior::simple(NodeIndex::anonymous(n), false, keys, q, unmeasured).unwrap()
    }

    #[test]
    fn mean_degree_counts_both_endpoints() {
        // 3 nodes, q = 1 on (0,1), everything else 0.
        let post = simple_post(vec![1.0, 0.0, 0.0], 0.0, 3);
        let est = mean_degree(&post);
        assert!((est.value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(est.std_dev, 0.0);
    }

    #[test]
    fn mean_degree_variance_sums_cells() {
        let post = simple_post(vec![0.5, 0.5], 0.0, 3);
        let est = mean_degree(&post);
        // Two cells at variance 1/4, weight (2/3)².
        assert!((est.std_dev * est.std_dev - 2.0 * 0.25 * 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn unmeasured_cells_use_the_implicit_probability() {
        let post = simple_post(vec![1.0], 0.25, 4);
        // 6 cells: one stored at 1, five at 0.25.
        let est = mean_degree(&post);
        assert!((est.value - 2.0 * (1.0 + 5.0 * 0.25) / 4.0).abs() < 1e-15);
        assert_eq!(post.edge_prob(3, 2), 0.25);
        assert_eq!(post.edge_prob(1, 0), 1.0);
    }

    #[test]
    fn implicit_truncated_poisson_normalizes() {
        let post = EdgePosterior::multigraph(
            NodeIndex::anonymous(3),
            vec![],
            3,
            vec![],
            0.4,
            Some(vec![2.0, 0.5, 0.5]),
        )
        .unwrap();
        let mut row = Vec::new();
        post.value_dist(0, 1, &mut row);
        let mu: f64 = 0.4 * 2.0 * 0.5;
        let z = 1.0 + mu + mu * mu / 2.0;
        assert!((row[0] - 1.0 / z).abs() < 1e-15);
        assert!((row[1] - mu / z).abs() < 1e-15);
        assert!((row[2] - mu * mu / 2.0 / z).abs() < 1e-15);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn map_network_threshold_is_strict() {
        let post = simple_post(vec![0.5, 0.8], 0.0, 3);
        let g = map_network(&post, 0.5);
        assert_eq!(g.value(0, 1), 0);
        assert_eq!(g.value(0, 2), 1);
        let all = map_network(&post, 0.4999);
        assert_eq!(all.value(0, 1), 1);
    }

    #[test]
    fn sampling_matches_cell_probabilities() {
        let post = simple_post(vec![0.3], 0.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = 20_000;
        let mut hits = 0usize;
        for _ in 0..m {
            hits += sample_network(&post, &mut rng).value(0, 1) as usize;
        }
        let rate = hits as f64 / m as f64;
        // 5 sigma of a Binomial(20000, 0.3) proportion.
        assert!((rate - 0.3).abs() < 5.0 * (0.3f64 * 0.7 / m as f64).sqrt());
    }

    #[test]
    fn monte_carlo_agrees_with_closed_form() {
        let post = simple_post(vec![0.9, 0.2, 0.4], 0.1, 4);
        let exact = mean_degree(&post);
        let mc = estimate_functional(&post, 20_000, 11, |g| {
            let n = g.n() as f64;
            2.0 * g.entries().map(|(_, _, v)| v as f64).sum::<f64>() / n
        })
        .unwrap();
        assert!((mc.mean - exact.value).abs() < 5.0 * mc.std_error);
    }

    #[test]
    fn band_partition_covers_every_cell() {
        let post = simple_post(vec![0.95, 0.5, 0.02], 0.02, 5);
        let band = certainty_band(&post, 0.1, 0.9).unwrap();
        assert_eq!(band.confident_present, 1);
        assert_eq!(band.uncertain, 1);
        assert_eq!(
            band.confident_absent + band.uncertain + band.confident_present,
            10
        );
    }

    #[test]
    fn false_discovery_rate_balances_rates() {
        let p = ModelParams::Bernoulli(crate::params::BernoulliParams {
            edge_prob: 0.5,
            true_pos: 0.8,
            false_pos: 0.2,
        });
        let fdr = false_discovery_rate(&p).unwrap();
        assert!((fdr[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn naive_degree_thresholds_positive_counts() {
        let t = crate::types::build_tallies(
            &[("a", "b", 1u8), ("a", "c", 0), ("b", "c", 1), ("b", "c", 1)],
            false,
        )
        .unwrap();
        assert!((naive_mean_degree(&t, 1) - 2.0 * 2.0 / 3.0).abs() < 1e-15);
        assert!((naive_mean_degree(&t, 2) - 2.0 * 1.0 / 3.0).abs() < 1e-15);
    }
}
