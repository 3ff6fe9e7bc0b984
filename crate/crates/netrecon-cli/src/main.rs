//! Command-line front end: fit a model to measurement data, generate
//! synthetic data, cross-check small instances by enumeration, and turn a
//! fitted posterior into samples, summary estimates, or a DOT rendering.
//!
//! Every run is deterministic given its flags: the same seed and inputs
//! produce byte-identical output files. Failures print one
//! `error[category]: message` line and exit nonzero.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use netrecon::em::{self, EmConfig, FitResult};
use netrecon::io::{self, FitReport};
use netrecon::oracle;
use netrecon::params::{ModelId, ModelParams};
use netrecon::posterior::{self, EdgePosterior};
use netrecon::synth::{self, SynthSpec};
use netrecon::types::TallyData;
use netrecon::{Error, Result};

#[derive(Parser)]
#[command(name = "netrecon", version, about = "Infer network structure from noisy measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to measurement data and write the posterior.
    Fit(FitArgs),
    /// Generate a synthetic network and noisy measurements of it.
    Synth(SynthArgs),
    /// Exact posterior by brute-force enumeration, for small instances.
    Oracle(OracleArgs),
    /// Draw networks from a fitted posterior.
    Sample(SampleArgs),
    /// Summary statistics of a fitted posterior.
    Estimate(EstimateArgs),
    /// Render a fitted posterior as a Graphviz file.
    Export(ExportArgs),
}

/// Input layout of a measurement file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// One check per line: `i<TAB>j<TAB>0|1`, with a mode column for
    /// multimodal models.
    Pairs,
    /// Aggregated counts per pair: `i<TAB>j<TAB>trials<TAB>positives`,
    /// either bare or under a `#tally` header.
    Tally,
}

#[derive(Args)]
struct DataArgs {
    /// Measurement data file.
    #[arg(long)]
    data: PathBuf,
    /// Layout of the data file.
    #[arg(long, value_enum, default_value_t = Format::Tally)]
    format: Format,
}

#[derive(Args)]
struct FitArgs {
    /// Model to fit.
    #[arg(long)]
    model: ModelId,
    #[command(flatten)]
    data: DataArgs,
    /// Convergence threshold on the largest parameter change.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Iteration cap per restart.
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Number of independently initialized restarts.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Seed for the restart initializations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Track only edge presence in multigraph models (the default).
    #[arg(long, conflicts_with = "exact")]
    sparse: bool,
    /// Track multiplicities up to --kmax instead of presence only.
    #[arg(long)]
    exact: bool,
    /// Largest multiplicity carried under --exact.
    #[arg(long, default_value_t = 3)]
    kmax: usize,
    /// Number of types fitted by the edge-types model.
    #[arg(long, default_value_t = 3)]
    edge_states: usize,
    /// Smallest probability listed in edges.tsv.
    #[arg(long, default_value_t = 0.01)]
    qmin: f64,
    /// Directory for params.json, edges.tsv, and trace.tsv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON recipe: nodes, model parameters, trial plan, seed.
    #[arg(long)]
    spec: PathBuf,
    /// Where to write the measurement tally.
    #[arg(long)]
    out_tally: PathBuf,
    /// Where to write the ground-truth network.
    #[arg(long)]
    out_network: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Fitted parameters (params.json or bare parameter JSON).
    #[arg(long)]
    params: PathBuf,
    /// Where to write the exact per-pair marginals as an edge list.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Fitted parameters (params.json or bare parameter JSON).
    #[arg(long)]
    params: PathBuf,
    /// Number of networks to draw.
    #[arg(long, default_value_t = 1)]
    samples: usize,
    /// Seed for the draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for sample-<k>.tsv files.
    #[arg(long)]
    out: PathBuf,
}

/// Built-in posterior summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Functional {
    /// Average degree of the network.
    MeanDegree,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Fitted parameters (params.json or bare parameter JSON).
    #[arg(long)]
    params: PathBuf,
    /// Quantity to estimate.
    #[arg(long, value_enum, default_value_t = Functional::MeanDegree)]
    functional: Functional,
    /// Estimate by Monte Carlo with this many posterior samples instead
    /// of in closed form.
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for the Monte Carlo draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report the naive estimate that keeps pairs with at least this
    /// many positive checks.
    #[arg(long)]
    min_positives: Option<u32>,
    /// Also report how many pairs fall below, inside, and above this
    /// posterior probability band.
    #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"])]
    band: Option<Vec<f64>>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Fitted parameters (params.json or bare parameter JSON).
    #[arg(long)]
    params: PathBuf,
    /// Where to write the Graphviz file.
    #[arg(long)]
    dot: PathBuf,
    /// Smallest probability drawn as an edge.
    #[arg(long, default_value_t = 0.01)]
    qmin: f64,
}

fn load_data(args: &DataArgs, model: ModelId) -> Result<TallyData> {
    if model.multimodal_data() {
        match args.format {
            Format::Pairs => Ok(TallyData::Modes(io::read_multimodal_records(&args.data)?)),
            Format::Tally => io::read_tally(&args.data),
        }
    } else {
        let directed = model.data_directed();
        match args.format {
            Format::Pairs => Ok(TallyData::Single(io::read_records(&args.data, directed)?)),
            Format::Tally => io::read_tally_or_counts(&args.data, directed),
        }
    }
}

/// Parameters with per-node tables only apply to the node list they were
/// fitted on; scalar and per-mode parameters transfer freely.
fn check_alignment(params: &ModelParams, nodes: Option<&[String]>, data: &TallyData) -> Result<()> {
    if !matches!(params, ModelParams::Config(_) | ModelParams::PerNode(_)) {
        return Ok(());
    }
    if let Some(nodes) = nodes {
        if nodes != data.index().labels() {
            return Err(Error::ModelMismatch(
                "the parameter file's node list does not match the data's node labels".into(),
            ));
        }
    }
    Ok(())
}

fn load_params_and_data(
    params_path: &Path,
    data_args: &DataArgs,
) -> Result<(ModelParams, TallyData)> {
    let (params, nodes) = io::read_params(params_path)?;
    let data = load_data(data_args, params.model_id())?;
    check_alignment(&params, nodes.as_deref(), &data)?;
    Ok((params, data))
}

fn propensity(params: &ModelParams) -> Option<&[f64]> {
    match params {
        ModelParams::Config(p) => Some(&p.propensity),
        ModelParams::PerNode(p) => Some(&p.propensity),
        _ => None,
    }
}

fn write_outputs(
    out: &Path,
    fit: &FitResult,
    data: &TallyData,
    input: &Path,
    cfg: &EmConfig,
    qmin: f64,
) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io_at(out, e))?;
    let reporter_precision = match (&fit.params, data) {
        (ModelParams::PerNode(p), TallyData::Single(t)) => {
            Some(posterior::reporter_precision(p, t)?)
        }
        _ => None,
    };
    let report = FitReport {
        model: fit.params.model_id(),
        params: fit.params.clone(),
        nodes: data.index().labels().to_vec(),
        objective: fit.objective,
        iterations: fit.iterations,
        converged: fit.converged,
        restart: fit.restart,
        notes: fit.notes.clone(),
        false_discovery_rate: posterior::false_discovery_rate(&fit.params).ok(),
        reporter_precision,
        input: Some(input.display().to_string()),
        config: Some(cfg.clone()),
    };
    io::write_report(&out.join("params.json"), &report)?;
    io::write_edges(&out.join("edges.tsv"), &fit.posterior, qmin)?;
    io::write_trace(&out.join("trace.tsv"), &fit.trace)?;
    Ok(())
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.qmin) {
        return Err(Error::InvalidInput(format!("qmin {} outside [0, 1]", a.qmin)));
    }
    let data = load_data(&a.data, a.model)?;
    let cfg = EmConfig {
        tol: a.tol,
        max_iter: a.max_iter,
        restarts: a.restarts,
        seed: a.seed,
        sparse: !a.exact,
        k_max: a.kmax,
        edge_states: a.edge_states,
    };
    let fit = em::run_em(a.model, &data, &cfg)?;
    write_outputs(&a.out, &fit, &data, &a.data.data, &cfg, a.qmin)?;
    println!("model\t{}", a.model);
    println!("nodes\t{}", data.n());
    println!("objective\t{}", fit.objective);
    println!("iterations\t{}", fit.iterations);
    println!("converged\t{}", fit.converged);
    println!("restart\t{}", fit.restart);
    for note in &fit.notes {
        println!("note\t{note}");
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let text = fs::read_to_string(&a.spec).map_err(|e| Error::io_at(&a.spec, e))?;
    let spec: SynthSpec = serde_json::from_str(&text)?;
    let (network, data) = synth::generate(&spec)?;
    io::write_tally(&a.out_tally, &data)?;
    if let Some(path) = &a.out_network {
        io::write_network(path, &network, data.index())?;
    }
    println!("nodes\t{}", network.n());
    println!("edges\t{}", network.edge_count());
    Ok(())
}

fn cmd_oracle(a: &OracleArgs) -> Result<()> {
    let (params, data) = load_params_and_data(&a.params, &a.data)?;
    let exact = oracle::enumerate_posterior(&data, &params)?;
    if let Some(out) = &a.out {
        io::write_edges(out, &exact.posterior, 0.0)?;
    }
    println!("log_evidence\t{}", exact.log_evidence);
    Ok(())
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let (params, data) = load_params_and_data(&a.params, &a.data)?;
    let post = em::estep(&params, &data)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io_at(&a.out, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for k in 0..a.samples {
        let g = posterior::sample_network(&post, &mut rng);
        io::write_network(&a.out.join(format!("sample-{k}.tsv")), &g, post.index())?;
    }
    println!("samples\t{}", a.samples);
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    let (params, data) = load_params_and_data(&a.params, &a.data)?;
    let post = em::estep(&params, &data)?;
    match (a.functional, a.samples) {
        (Functional::MeanDegree, None) => {
            let est = posterior::mean_degree(&post);
            println!("mean_degree\t{}\t{}", est.value, est.std_dev);
        }
        (Functional::MeanDegree, Some(samples)) => {
            let est = posterior::estimate_functional(&post, samples, a.seed, |g| {
                posterior::network_mean_degree(post.kind(), g)
            })?;
            println!(
                "mean_degree_mc\t{}\t{}\t{}",
                est.mean, est.std_error, est.samples
            );
        }
    }
    if let Some(min_positives) = a.min_positives {
        let naive = posterior::naive_mean_degree(data.single()?, min_positives);
        println!("naive_mean_degree\t{naive}");
    }
    if let Some(band) = &a.band {
        let counts = posterior::certainty_band(&post, band[0], band[1])?;
        println!(
            "band\t{}\t{}\t{}",
            counts.confident_absent, counts.uncertain, counts.confident_present
        );
    }
    Ok(())
}

fn cmd_export(a: &ExportArgs) -> Result<()> {
    let (params, data) = load_params_and_data(&a.params, &a.data)?;
    let post: EdgePosterior = em::estep(&params, &data)?;
    io::write_dot(&a.dot, &post, a.qmin, propensity(&params))?;
    println!("dot\t{}", a.dot.display());
    Ok(())
}

fn run(command: &Command) -> Result<()> {
    match command {
        Command::Fit(a) => cmd_fit(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Export(a) => cmd_export(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
