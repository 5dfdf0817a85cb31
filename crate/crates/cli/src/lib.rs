//! `fsgeo` command-line driver.
//!
//! Every command writes CSV data plus a `manifest.json` into `--out`. Exit
//! codes: 0 success, 2 usage error, 3 numerical failure (singular or
//! degenerate input), 4 tolerance failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod output;

#[derive(Debug, Parser)]
#[command(name = "fsgeo", version, about = "Fubini-Study geometry of bipartite entanglement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Haar-sample entanglement and histogram the density of states.
    SampleOmega(SampleOmegaArgs),
    /// Closed-form curves of the two-qubit Schmidt family.
    TwoQubitAnalytic(AnalyticArgs),
    /// Check d S_geo/de against the averaged Weingarten trace.
    VerifyIdentity(VerifyArgs),
    /// Block-entanglement scan of a spin-1/2 chain.
    SpinChain(SpinChainArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

/// Histogram binning flag: `fd` (Freedman-Diaconis) or a bin count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinsArg {
    FreedmanDiaconis,
    Count(usize),
}

impl std::str::FromStr for BinsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("fd") {
            return Ok(BinsArg::FreedmanDiaconis);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(BinsArg::Count(n)),
            _ => Err(format!("expected `fd` or a positive bin count, got `{s}`")),
        }
    }
}

impl std::fmt::Display for BinsArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BinsArg::FreedmanDiaconis => f.write_str("fd"),
            BinsArg::Count(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("cut").required(true).args(["da", "n_qubits"])))]
pub struct SampleOmegaArgs {
    /// Dimension of subsystem A.
    #[arg(long, requires = "db")]
    pub da: Option<usize>,
    /// Dimension of subsystem B.
    #[arg(long, requires = "da")]
    pub db: Option<usize>,
    /// Number of spin-1/2 sites (alternative to --da/--db).
    #[arg(long, requires = "block", conflicts_with_all = ["da", "db"])]
    pub n_qubits: Option<usize>,
    /// Sites in block A.
    #[arg(long, requires = "n_qubits")]
    pub block: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "fd")]
    pub bins: BinsArg,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyticArgs {
    #[arg(long, default_value_t = 0.01)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 0.78)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// `start:stop:count` or a comma-separated list of Schmidt angles.
    #[arg(long, default_value = "0.2:0.73:12")]
    pub theta_grid: String,
    /// Largest accepted relative deviation.
    #[arg(long, default_value_t = 2e-3)]
    pub tolerance: f64,
    /// Nodes of the orbit quadrature.
    #[arg(long, default_value_t = 16)]
    pub quadrature_points: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SpinChainArgs {
    #[arg(long)]
    pub n_qubits: usize,
    /// Sites in block A; ignored with --block-sweep.
    #[arg(long, required_unless_present = "block_sweep")]
    pub block: Option<usize>,
    /// Scan every block length 1..=N/2.
    #[arg(long)]
    pub block_sweep: bool,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "fd")]
    pub bins: BinsArg,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory; defaults to the one recorded in the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("tolerance failure: {0}")]
    Tolerance(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Tolerance(_) => 4,
        })
    }
}

impl From<fsgeo::Error> for CliError {
    fn from(e: fsgeo::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl Command {
    /// Subcommand name and flags, as recorded in manifests.
    pub fn parameters(&self) -> (&'static str, BTreeMap<String, String>) {
        let mut p = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            p.insert(k.to_string(), v);
        };
        let name = match self {
            Command::SampleOmega(a) => {
                if let (Some(da), Some(db)) = (a.da, a.db) {
                    put("da", da.to_string());
                    put("db", db.to_string());
                }
                if let (Some(n), Some(l)) = (a.n_qubits, a.block) {
                    put("n-qubits", n.to_string());
                    put("block", l.to_string());
                }
                put("samples", a.samples.to_string());
                put("seed", a.seed.to_string());
                put("bins", a.bins.to_string());
                put("out", a.out.display().to_string());
                "sample-omega"
            }
            Command::TwoQubitAnalytic(a) => {
                put("theta-min", output::num(a.theta_min));
                put("theta-max", output::num(a.theta_max));
                put("steps", a.steps.to_string());
                put("out", a.out.display().to_string());
                "two-qubit-analytic"
            }
            Command::VerifyIdentity(a) => {
                put("theta-grid", a.theta_grid.clone());
                put("tolerance", output::num(a.tolerance));
                put("quadrature-points", a.quadrature_points.to_string());
                put("out", a.out.display().to_string());
                "verify-identity"
            }
            Command::SpinChain(a) => {
                put("n-qubits", a.n_qubits.to_string());
                if let Some(l) = a.block {
                    put("block", l.to_string());
                }
                if a.block_sweep {
                    put("block-sweep", String::new());
                }
                put("samples", a.samples.to_string());
                put("seed", a.seed.to_string());
                put("bins", a.bins.to_string());
                put("out", a.out.display().to_string());
                "spin-chain"
            }
            Command::Replay(a) => {
                put("manifest", a.manifest.display().to_string());
                "replay"
            }
        };
        (name, p)
    }
}

/// Rebuilds the command line recorded in a manifest. Flags with empty values
/// are switches.
pub fn command_from_manifest(
    manifest: &output::RunManifest,
    out: Option<&PathBuf>,
) -> Result<Command, CliError> {
    let mut argv = vec!["fsgeo".to_string(), manifest.command.clone()];
    for (k, v) in &manifest.parameters {
        if k == "out" && out.is_some() {
            continue;
        }
        argv.push(format!("--{k}"));
        if !v.is_empty() {
            argv.push(v.clone());
        }
    }
    if let Some(out) = out {
        argv.push("--out".into());
        argv.push(out.display().to_string());
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Usage("a manifest cannot replay another replay".into()));
    }
    Ok(cli.command)
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::SampleOmega(ref a) => commands::sample_omega(&command, a),
        Command::TwoQubitAnalytic(ref a) => commands::two_qubit_analytic(&command, a),
        Command::VerifyIdentity(ref a) => commands::verify_identity(&command, a),
        Command::SpinChain(ref a) => commands::spin_chain(&command, a),
        Command::Replay(a) => {
            let manifest = output::RunManifest::read(&a.manifest)?;
            run(command_from_manifest(&manifest, a.out.as_ref())?)
        }
    }
}

/// Worker count from `FSGEO_THREADS`; `None` means hardware parallelism.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("FSGEO_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("FSGEO_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}
