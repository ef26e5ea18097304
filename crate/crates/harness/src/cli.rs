//! Command-line parsing and dispatch.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{normalize_key, parse_ranking, read_config_file, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment, write_outputs};

#[derive(Debug, Parser)]
#[command(name = "kemeny-el", version, about = "Elicit approximate Kemeny rankings from pairwise comparisons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every strategy on seeded instances and write traces, aggregates and a chart.
    Run(ExperimentFlags),
    /// Check a matrix or profile file for completeness, triangle and Borda constraints.
    Validate {
        file: PathBuf,
        /// Number of voters, for the completeness check on matrix files.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Print the Kemeny ranking (one-based arms) and score of a matrix or profile file.
    Solve {
        file: PathBuf,
        /// Tie-break ranking such as 1>2>3; defaults to the natural order.
        #[arg(long)]
        tiebreak: Option<String>,
    },
    /// Write the profile of one experiment instance.
    Gen {
        #[command(flatten)]
        flags: ExperimentFlags,
        /// Instance index.
        #[arg(long, default_value_t = 0)]
        instance: usize,
    },
}

/// Experiment settings; each overrides the same key from `--config`.
#[derive(Debug, Args, Default)]
pub struct ExperimentFlags {
    /// File of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// Absolute approximation target.
    #[arg(long)]
    pub rho: Option<String>,
    /// Target as a fraction of k(k-1)/2 (default 0.1).
    #[arg(long)]
    pub rho_frac: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// uniform | mallows | single-peaked
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub phi: Option<String>,
    /// Mallows reference ranking such as 1>2>3.
    #[arg(long)]
    pub reference: Option<String>,
    /// with-replacement | without-replacement
    #[arg(long)]
    pub mode: Option<String>,
    /// Comma-separated list, or `all`.
    #[arg(long)]
    pub strategies: Option<String>,
    /// true | false
    #[arg(long)]
    pub prune: Option<String>,
    #[arg(long)]
    pub instances: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub cert_every: Option<String>,
    #[arg(long)]
    pub budget: Option<String>,
    /// Output directory for `run`, output file for `gen` (stdout if absent).
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub jobs: Option<String>,
}

impl ExperimentFlags {
    fn pairs(&self) -> Result<BTreeMap<String, String>> {
        if self.rho.is_some() && self.rho_frac.is_some() {
            return Err(HarnessError::Config("give either --rho or --rho-frac, not both".into()));
        }
        let mut pairs = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("k", &self.k),
            ("n", &self.n),
            ("rho", &self.rho),
            ("rho_frac", &self.rho_frac),
            ("delta", &self.delta),
            ("generator", &self.generator),
            ("phi", &self.phi),
            ("reference", &self.reference),
            ("mode", &self.mode),
            ("strategies", &self.strategies),
            ("prune", &self.prune),
            ("instances", &self.instances),
            ("seed", &self.seed),
            ("cert_every", &self.cert_every),
            ("budget", &self.budget),
            ("out", &self.out),
            ("jobs", &self.jobs),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                // an explicit flag replaces the other way of giving rho
                match key {
                    "rho" => pairs.remove("rho_frac"),
                    "rho_frac" => pairs.remove("rho"),
                    _ => None,
                };
                pairs.insert(normalize_key(key), v.clone());
            }
        }
        Ok(pairs)
    }

    pub fn config(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_pairs(&self.pairs()?)
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| HarnessError::io("<stdout>", e))
}

pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Run(flags) => {
            let cfg = flags.config()?;
            let report = run_experiment(&cfg)?;
            let written = write_outputs(&cfg, &report)?;
            write_out(out, &report.summary(&cfg))?;
            write_out(out, &format!("wrote {} files to {}\n", written.len(), cfg.out.display()))
        }
        Command::Validate { file, n } => write_out(out, &commands::validate(&commands::read_file(&file)?, n)?),
        Command::Solve { file, tiebreak } => {
            let tb = tiebreak.as_deref().map(parse_ranking).transpose()?;
            write_out(out, &commands::solve(&commands::read_file(&file)?, tb.as_ref())?)
        }
        Command::Gen { flags, instance } => {
            let mut pairs = flags.pairs()?;
            let target = pairs.remove("out");
            let cfg = ExperimentConfig::from_pairs(&pairs)?;
            let text = commands::generate(&cfg, instance)?;
            match target {
                Some(path) => std::fs::write(&path, text).map_err(|e| HarnessError::io(path, e)),
                None => write_out(out, &text),
            }
        }
    }
}

/// Parses `args` (including the program name), runs the command and maps
/// failures to exit codes: 1 for configuration or input errors, 2 for I/O.
pub fn main_with(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
