//! Argument parsing and exit-code mapping.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, Options};
use crate::config::parse_horizons;
use crate::error::Result;

/// Comma-separated horizons, kept as one value so clap does not treat it as a list.
#[derive(Debug, Clone)]
struct Horizons(Vec<f64>);

fn horizons(s: &str) -> std::result::Result<Horizons, String> {
    parse_horizons(s).map(Horizons)
}

#[derive(Debug, Parser)]
#[command(name = "zicure", version, about = "Zero-inflated Weibull cure rate models for loan lifetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a dataset from a scenario preset or custom coefficients.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        scenario: Option<u8>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Fit a model to a dataset.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Horizons for the derived per-profile block.
        #[arg(long, value_parser = horizons)]
        horizons: Option<Horizons>,
    },
    /// Replicated simulate-then-fit study.
    #[command(name = "mc-study")]
    McStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        scenario: Option<u8>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Kaplan-Meier curves against the fitted survival, per covariate profile.
    Km {
        #[command(flatten)]
        common: Common,
    },
    /// Score applicants with a fitted model.
    Score {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = horizons)]
        horizons: Option<Horizons>,
    },
}

fn dispatch(command: Command) -> Result<Vec<PathBuf>> {
    let base = |c: Common| Options {
        config: c.config,
        out: c.out,
        ..Options::default()
    };
    match command {
        Command::Simulate { common, seed, scenario, n } => commands::simulate(&Options {
            seed,
            scenario,
            n,
            ..base(common)
        }),
        Command::Fit { common, horizons } => commands::fit(&Options {
            horizons: horizons.map(|h| h.0),
            ..base(common)
        }),
        Command::McStudy {
            common,
            seed,
            scenario,
            n,
            replications,
        } => commands::mc_study(&Options {
            seed,
            scenario,
            n,
            replications,
            ..base(common)
        }),
        Command::Km { common } => commands::km(&base(common)),
        Command::Score { common, horizons } => commands::score(&Options {
            horizons: horizons.map(|h| h.0),
            ..base(common)
        }),
    }
}

/// Runs the command line and returns the process exit code: 0 success,
/// 1 usage, 2 data validation, 3 non-convergence.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
