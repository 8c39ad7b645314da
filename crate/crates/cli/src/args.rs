use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(
    name = "abel-radon",
    version,
    about = "Traces, Abel-Radon transforms and inverse reconstruction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON result to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Write the text report to this file instead of stderr.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Seed for randomized choices; recorded in the provenance.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample traces u_I over a parameter domain.
    Trace(TraceArgs),
    /// Sample the chart coefficients of the Abel-Radon transform.
    Radon(RadonArgs),
    /// Recover minimal polynomials and a numerator from a trace table.
    Reconstruct(ReconstructArgs),
    /// Run a verification check.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Extend traces from a circle in a to a polydisc through the shock relations.
    Extend(ExtendArgs),
    /// Run a job file.
    Run { job: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Check the relations d/db u_{I+e1} = d/da u_I on a chart table with probe rings.
    Shock {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, default_value_t = 1e-6, value_parser = positive)]
        tol: f64,
    },
    /// Classify each sample of a transform as holomorphic or a pole.
    Holomorphy {
        /// A transform written by `radon`; otherwise one is computed from the data.
        #[arg(long)]
        radon: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        tol: f64,
    },
    /// Compare the traces of two data over vertical charts.
    Match {
        #[arg(long)]
        data: PathBuf,
        /// Residue data, or the result of `reconstruct`.
        #[arg(long)]
        against: PathBuf,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        tol: f64,
    },
    /// Compare a reparametrized transform with the pullback of the chart coefficients.
    Reparam {
        #[command(flatten)]
        data: DataArgs,
        /// Affine map {"matrix", "offset"}; a random one is drawn from the seed otherwise.
        #[arg(long)]
        map: Option<PathBuf>,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value_t = 1e-8, value_parser = positive)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, value_enum, default_value_t = Space::Chart)]
    pub space: Space,
    /// Largest total order |I| of the sampled traces.
    #[arg(long, default_value_t = 4)]
    pub order: u32,
}

#[derive(Args, Debug)]
pub struct RadonArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub traces: PathBuf,
    /// Largest minimal-polynomial degree tried.
    #[arg(long, default_value_t = 8)]
    pub d_max: usize,
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub tol: f64,
    /// Fit every coefficient of P as a polynomial of at most this degree in x.
    #[arg(long)]
    pub degree_bound: Option<usize>,
    /// Degree bound for the coefficients of Q; defaults to the degree bound.
    #[arg(long, requires = "degree_bound")]
    pub numerator_bound: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ExtendArgs {
    /// Chart table sampled on a circle in a.
    #[arg(long)]
    pub traces: PathBuf,
    /// Data whose trace u_0 is evaluated directly along the paths.
    #[command(flatten)]
    pub data: DataArgs,
    /// Target polydisc; the center defaults to the table's.
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, default_value_t = 3)]
    pub order: u32,
    /// Also compute the traces directly and compare.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub tol: f64,
}

/// Residue data from one file, or assembled from a variety and polynomials.
#[derive(Args, Debug, Default)]
pub struct DataArgs {
    #[arg(long, conflicts_with_all = ["variety", "numerator", "polar"])]
    pub data: Option<PathBuf>,
    #[arg(long, requires = "numerator")]
    pub variety: Option<PathBuf>,
    #[arg(long, requires = "variety")]
    pub numerator: Option<PathBuf>,
    #[arg(long, requires = "variety")]
    pub polar: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct DomainArgs {
    /// DomainSpec file {"center", "radii"}.
    #[arg(long, conflicts_with_all = ["center", "radii"])]
    pub domain: Option<PathBuf>,
    /// Comma-separated complex center, e.g. `0.3+0.1i,1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub center: Option<Vec<Complex64>>,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
}

#[derive(Args, Debug, Default)]
pub struct SamplingArgs {
    /// Lattice nodes per axis, e.g. `5x5`; one number applies to every axis.
    #[arg(long, conflicts_with = "circle")]
    pub grid: Option<String>,
    /// Circle layout `AXIS:NODES`.
    #[arg(long)]
    pub circle: Option<String>,
    /// Probe rings `RADIUS:NODES` around every node.
    #[arg(long)]
    pub probe: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Chart,
    Base,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}
