//! `strat-forge`: batch front end for the stratified-reduction engine.
//!
//! Exit status is 0 when every integrity check and verification threshold
//! passes, 1 for usage and input errors, and 2 when an integrity ledger or a
//! verification threshold fails.

mod artifact;
mod job;
mod text;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use strat_forge::local_model::default_max_depth;
use strat_forge::strat::{assemble_partition_with_limit, DEFAULT_N_MAX};
use strat_forge::{link_tree, verify_ledgers, VerificationBudget};

use artifact::{Artifact, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}:{line}:{column}: {message}", path.display())]
    Input {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Engine(strat_forge::Error),

    #[error("integrity violation [{ledger}]: {detail}")]
    Integrity { ledger: String, detail: String },
}

impl From<strat_forge::Error> for CliError {
    fn from(e: strat_forge::Error) -> Self {
        match e {
            strat_forge::Error::Integrity { ledger, detail } => CliError::Integrity {
                ledger: ledger.to_string(),
                detail,
            },
            other => CliError::Engine(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Integrity { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "strat-forge",
    version,
    about = "Orbit-type stratifications of abelian symplectic and contact quotients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the stratification of the quotient.
    Stratify(Common),
    /// Emit the recursive link tree.
    Links(Common),
    /// Run the sampled checks and emit the verification report.
    Verify(Common),
    /// Stratification, link tree and verification; text by default.
    Report(Common),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Job file with `torus_rank`, `moduli`, `weights`, `finite_chars`, `kind`.
    #[arg(long)]
    input: PathBuf,
    /// Seed for the sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Volume-weighted samples for the density check.
    #[arg(long)]
    samples: Option<usize>,
    /// Link tree recursion depth (defaults to the number of coordinates).
    #[arg(long)]
    max_depth: Option<usize>,
    /// Multiplier on the neighbor-distance scale for the connectivity graph.
    #[arg(long)]
    eps_scale: Option<f64>,
    /// Coordinate limit for exact enumeration.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    n_max: usize,
    /// Write the output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; `report` defaults to text, the others to json.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Test mode: compare the result with a stored artifact and exit 2 on any difference.
    #[arg(long)]
    golden: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, common) = match &cli.command {
        Command::Stratify(c) => ("stratify", c),
        Command::Links(c) => ("links", c),
        Command::Verify(c) => ("verify", c),
        Command::Report(c) => ("report", c),
    };
    match run(name, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("strat-forge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("STRAT_FORGE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("STRAT_FORGE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(command: &str, c: &Common) -> Result<(), CliError> {
    configure_threads()?;
    if c.max_depth == Some(0) {
        return Err(CliError::Usage("--max-depth must be at least 1".into()));
    }
    if let Some(x) = c.eps_scale {
        if !(x.is_finite() && x > 0.0) {
            return Err(CliError::Usage("--eps-scale must be a positive number".into()));
        }
    }
    let job = job::load(&c.input)?;
    let ws = &job.system;
    let max_depth = c.max_depth.unwrap_or_else(|| default_max_depth(ws));

    let mut artifact = Artifact {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        kind: job.kind,
        system: ws.clone(),
        seed: None,
        partition: None,
        link_tree: None,
        verification: None,
    };
    // Enforce the coordinate limit before the link tree enumerates supports.
    let partition = assemble_partition_with_limit(ws, job.kind, c.n_max)?;
    if command == "stratify" {
        artifact.partition = Some(partition);
    } else {
        let tree = link_tree(ws, job.kind, max_depth)?;
        if command != "links" {
            let mut budget = VerificationBudget::default();
            if let Some(s) = c.samples {
                budget.density_samples = s;
            }
            if let Some(x) = c.eps_scale {
                budget.connectivity.eps_scale = x;
            }
            artifact.seed = Some(c.seed);
            artifact.verification = Some(verify_ledgers(&tree, &budget, c.seed)?);
        }
        artifact.link_tree = Some(tree);
    }
    artifact.check_integrity()?;

    let format = c.format.unwrap_or(if command == "report" { Format::Text } else { Format::Json });
    let rendered = match format {
        Format::Json => artifact.to_json(),
        Format::Text => text::render(&artifact),
    };
    match &c.out {
        Some(path) => std::fs::write(path, &rendered).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(rendered.as_bytes());
        }
    }

    if let Some(path) = &c.golden {
        let golden = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        artifact.compare_golden(&golden)?;
    }
    if let Some(v) = &artifact.verification {
        if !v.pass {
            return Err(CliError::Integrity {
                ledger: "verification".into(),
                detail: v.failures().join("; "),
            });
        }
    }
    Ok(())
}
