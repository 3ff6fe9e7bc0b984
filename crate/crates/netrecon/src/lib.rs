//! Posterior inference of network structure from repeated noisy measurements.
//!
//! Many network datasets are not direct observations of edges but repeated,
//! error-prone measurements: survey waves that each ask "are you friends with
//! j?", proximity pings, per-specimen evidence of a trophic interaction. This
//! crate treats the measurements as data `D` and the network itself as an
//! unknown, and computes the posterior distribution
//!
//! ```text
//! P(A | D) = Σ_θ P(D | A, θ) P(A | γ) / P(D)
//! ```
//!
//! over adjacency matrices `A`, where the network prior `P(A|γ)` and the
//! measurement error model `P(D|A,θ)` have unknown parameters fitted by
//! expectation-maximization. Because both the priors and the error models
//! factor over node pairs, the posterior factors too: the E-step yields one
//! closed-form edge probability `Q_ij` per pair, and the M-step updates every
//! parameter in closed form. The result is not a single point-estimate
//! network but a distribution that any network statistic can be averaged
//! over.
//!
//! Six model combinations are supported: a Bernoulli random graph with a
//! global true/false-positive error model, Poisson and degree-weighted
//! multigraph priors with multiplicity-dependent detection rates, a directed
//! Bernoulli graph measured through several independent data modes, a
//! degree-weighted prior with per-node reporting rates (self-reported ties),
//! and a prior over discrete edge types.
//!
//! The crate is organized by role: [`types`] holds tallies, networks, and
//! the node index; [`params`] the model identifiers and parameter sets;
//! [`models`] exact prior/likelihood/objective evaluation; [`em`] the
//! fitting engine; [`posterior`] quantities derived from a fitted posterior;
//! [`synth`] synthetic data generation; [`oracle`] brute-force enumeration
//! for validating the factorized algebra on small instances; [`io`] file
//! formats and reports.

pub mod em;
pub mod error;
pub mod io;
pub mod logspace;
pub mod models;
pub mod oracle;
pub mod params;
pub mod posterior;
pub mod synth;
pub mod types;

pub use em::{run_em, EmConfig, FitResult};
pub use error::{Error, Result};
pub use params::{ModelId, ModelParams};
pub use posterior::EdgePosterior;
pub use types::{
    build_multimodal, build_tallies, MeasurementTally, MultimodalTally, Network, NodeIndex,
    TallyData,
};
