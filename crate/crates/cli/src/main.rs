//! Command-line front end for the verification library: run scenario
//! configs, chart report margins, and query the closed-form constants.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for
//! usage and configuration errors.

mod config;
mod plot;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::CliError;
use otiso::geometry::{alpha_constant, alpha_n1, catalog};
use otiso::inequalities::sobolev_constant;

#[derive(Parser)]
#[command(
    name = "otiso",
    version,
    about = "Verify isoperimetric and Sobolev inequalities on sampled submanifolds \
             via two-stage optimal transport"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (path to a JSON config, or a bundled scenario name)
    Run {
        /// Config file path or bundled name (`equality-case`,
        /// `composition-optimality`)
        config: String,
    },
    /// Render SVG margin charts from a report CSV produced by `run`
    Plot {
        /// Report CSV path
        csv: PathBuf,
        /// Output SVG path
        #[arg(short, long)]
        output: PathBuf,
    },
    /// List the built-in surfaces and their parameters
    Catalog,
    /// Average squared cosine between a fixed plane and a Haar-random one
    Alpha {
        /// Plane dimension
        #[arg(long)]
        n: usize,
        /// Codimension
        #[arg(long)]
        k: usize,
        /// Monte Carlo sample count (required for k > 1)
        #[arg(long)]
        mc: Option<usize>,
        /// Seed for the Monte Carlo draw (required with --mc)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sharp Sobolev constant of n-space for the given exponent
    Constant {
        /// Space dimension (p < n required)
        #[arg(long)]
        n: usize,
        /// Sobolev exponent, 1 < p < n
        #[arg(long)]
        p: f64,
        /// Panels per axis in the profile optimisation
        #[arg(long, default_value_t = 24)]
        grid: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = dispatch(cli) {
        eprintln!("error: {}", error.to_string().trim_end());
        std::process::exit(error.code());
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => run::run_scenario(&config::load_scenario(&config)?),
        Command::Plot { csv, output } => plot::plot_reports(&csv, &output),
        Command::Catalog => {
            list_catalog();
            Ok(())
        }
        Command::Alpha { n, k, mc, seed } => alpha_command(n, k, mc, seed),
        Command::Constant { n, p, grid } => constant_command(n, p, grid),
    }
}

fn list_catalog() {
    for entry in catalog::entries() {
        println!("{}", entry.id);
        println!("    {}", entry.summary);
        for param in entry.params {
            println!("    {} = {} — {}", param.name, param.default, param.doc);
        }
    }
}

fn alpha_command(n: usize, k: usize, mc: Option<usize>, seed: Option<u64>) -> Result<(), CliError> {
    match mc {
        Some(samples) => {
            let seed = seed.ok_or_else(|| {
                CliError::usage("Monte Carlo estimation needs --seed for reproducibility")
            })?;
            let estimate = alpha_constant(n, k, samples, seed)?;
            println!(
                "alpha({n}, {k}) ≈ {:.9} ± {:.3e} (standard error over {} samples, seed {seed})",
                estimate.value, estimate.std_error, estimate.samples
            );
        }
        None => {
            if k != 1 {
                return Err(CliError::usage(
                    "quadrature covers codimension k = 1 only; pass --mc and --seed for k > 1",
                ));
            }
            println!("alpha({n}, 1) = {:.12} (quadrature)", alpha_n1(n, 256)?);
        }
    }
    Ok(())
}

fn constant_command(n: usize, p: f64, grid: usize) -> Result<(), CliError> {
    let value = sobolev_constant(n, p, grid)?;
    println!("sharp Sobolev constant S({n}, {p}) = {value:.9}");
    Ok(())
}
