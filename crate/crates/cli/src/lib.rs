//! Command-line front end: classification, exact moments, oracle checks,
//! simulation and verification of multiple-drawing urns.

pub mod commands;
pub mod config;
pub mod presets;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use multidraw::SamplingModel;

use commands::{Failure, EXIT_OK, EXIT_PARSE};
use config::{ConfigFile, Overrides};

#[derive(Debug, Parser)]
#[command(name = "multidraw", version, about = "Balanced two-colour urns with multiple drawings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML experiment file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed for simulation and verification.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory for CSV files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Named urn, e.g. "friedman m=3 c=2".
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Sampling model: M (without replacement) or R (with replacement).
    #[arg(long, global = true, value_name = "M|R")]
    pub model: Option<SamplingModel>,

    /// Also compare the exact moments with the DP oracle.
    #[arg(long, global = true)]
    pub oracle_check: bool,

    /// dyadic, final, or a comma-separated list of steps.
    #[arg(long, global = true, value_name = "dyadic|list")]
    pub checkpoints: Option<String>,

    /// Cap on worker threads.
    #[arg(long, global = true, env = "MULTIDRAW_THREADS", value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tenability, affinity, index, regime and growth orders.
    Classify,
    /// Exact moment series as CSV.
    Exact,
    /// Exact engine against the DP oracle.
    OracleCheck,
    /// Monte Carlo traces and checkpoint summary.
    Simulate,
    /// Regime test battery.
    Verify,
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let file = match &cli.config {
        Some(path) => config::load(path).map_err(|m| Failure::new(EXIT_PARSE, m))?,
        None => ConfigFile::default(),
    };
    let overrides = Overrides {
        preset: cli.preset.clone(),
        model: cli.model,
        seed: cli.seed,
        checkpoints: cli.checkpoints.clone(),
        oracle_check: cli.oracle_check,
    };
    let exp = config::resolve(file, &overrides).map_err(|m| Failure::new(EXIT_PARSE, m))?;
    let out_dir = cli.out.as_deref();
    match cli.command {
        Command::Classify => commands::classify_cmd(&exp, out),
        Command::Exact => commands::exact_cmd(&exp, out_dir, out, err),
        Command::OracleCheck => commands::oracle_cmd(&exp, out_dir, out),
        Command::Simulate => {
            let dir = cli.out.clone().unwrap_or_else(commands::default_out_dir);
            commands::simulate_cmd(&exp, &dir, err)
        }
        Command::Verify => commands::verify_cmd(&exp, out_dir, out),
    }
}

fn init_threads(n: Option<usize>) {
    if let Some(n) = n.filter(|&n| n > 0) {
        // fails only if a pool already exists, in which case it is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args` and runs the command; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_PARSE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    init_threads(cli.threads);
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
