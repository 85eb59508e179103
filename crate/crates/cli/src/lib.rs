//! Command-line driver for the Bingham duct-flow solver and its reduced model.

pub mod commands;
pub mod config;

use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Failure reported as one line, `error[<code>]: <message>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new("invalid-argument", message)
    }

    pub fn missing(message: impl Into<String>) -> Self {
        Self::new("missing-artifact", message)
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::new("parse", format!("line {line}: {}", message.into()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // keep the report on a single line
        write!(f, "error[{}]: {}", self.code, self.message.replace('\n', " "))
    }
}

impl std::error::Error for CliError {}

impl From<viscorom::Error> for CliError {
    fn from(e: viscorom::Error) -> Self {
        use viscorom::Error as E;
        let code = match &e {
            E::InvalidArgument(_) | E::IndexOutOfRange { .. } | E::DimensionMismatch { .. } => "invalid-argument",
            E::SolverFailure { .. } => "solver-failure",
            E::Parse { .. } => "parse",
            E::FingerprintMismatch { .. } => "fingerprint-mismatch",
            E::NoConvergedSnapshots => "no-converged-snapshots",
            E::TrainingDiverged { .. } => "training-diverged",
            E::Io(_) => "io",
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new("io", e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "viscorom",
    version,
    about = "Bingham duct flow: full-order ALG2 solver and POD + neural-network reduced model"
)]
pub struct Cli {
    /// Run configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for artifacts whose paths are not given explicitly.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a mesh and write it in the mesh text format.
    Mesh {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the full model for one Bingham number or a two-zone pair.
    Solve {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-iteration residuals as CSV.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Sample parameters and run the full model for each sample.
    Snapshots {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the POD basis of a snapshot archive.
    Pod {
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Singular values as CSV.
        #[arg(long)]
        singular_values: Option<PathBuf>,
    },
    /// Train the coefficient network on a snapshot archive and POD basis.
    Train {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        network: NetworkArgs,
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Train/test loss per epoch as CSV.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Evaluate the reduced model at one parameter point.
    Eval {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow rate against pressure gradient through the reduced model.
    Sweep {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Yield stress in Pa.
        #[arg(long)]
        tau_s: Option<f64>,
        /// Plastic viscosity in Pa·s.
        #[arg(long)]
        mu: Option<f64>,
        /// Characteristic length in m.
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        dp_min: Option<f64>,
        #[arg(long)]
        dp_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Also run the full model at every point.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both models at one parameter point and report the differences.
    Compare {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a complete offline + online experiment.
    Reproduce {
        #[arg(value_enum)]
        experiment: commands::Experiment,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        network: NetworkArgs,
        /// Output directory for every artifact of the run.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Default)]
pub struct DomainArgs {
    /// square | rectangle[:w,h] | triangle | l_shape | disk | ellipse[:a,b]
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// Bingham number, constant over the domain.
    #[arg(long = "B", conflicts_with_all = ["b1", "b2"])]
    pub b: Option<f64>,
    /// Bingham number where x <= 0.
    #[arg(long = "B1", requires = "b2")]
    pub b1: Option<f64>,
    /// Bingham number where x > 0.
    #[arg(long = "B2", requires = "b1")]
    pub b2: Option<f64>,
}

impl ParamArgs {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match (self.b, self.b1, self.b2) {
            (Some(b), None, None) => Ok(vec![b]),
            (None, Some(b1), Some(b2)) => Ok(vec![b1, b2]),
            _ => Err(CliError::invalid("give either --B or both --B1 and --B2")),
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct SamplingArgs {
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// uniform | halton
    #[arg(long)]
    pub scheme: Option<String>,
    /// Parameter dimension: 1 (B) or 2 (B1, B2).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct NetworkArgs {
    /// POD truncation rank.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Hidden layer widths, e.g. 60,50,40.
    #[arg(long)]
    pub widths: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Seed for weight initialisation, shuffling and the train/test split.
    #[arg(long = "net-seed")]
    pub net_seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command. Progress and
/// reports go to `out`.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(out, "{}", e.render())?;
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            return Err(CliError::new("usage", first));
        }
    };
    commands::execute(cli, out)
}
