//! Benchmark driver: runs multiscale solver sweeps from a JSON config and
//! writes CSV/JSON result tables with decay-fit summaries.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use expmsfem_cli::config::{ExperimentConfig, DESK_CONFIG, PAPER_CONFIG};
use expmsfem_cli::runner::{run_experiment, write_outputs};

#[derive(Parser)]
#[command(name = "expmsfem", version, about = "Multiscale solver benchmark driver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment sweep and write results.csv, decay_fit.csv, and
    /// results.json.
    Run {
        /// JSON config path; omit to run an embedded suite.
        config: Option<PathBuf>,
        /// Embedded suite to run when no config path is given.
        #[arg(long, value_enum, default_value_t = Scale::Desk, conflicts_with = "config")]
        scale: Scale,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker thread count (overrides the config; 0 keeps the default).
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    /// Workstation-sized suite (h = 1/256).
    Desk,
    /// Full-sized suite (h = 1/1024); hours of runtime.
    Paper,
}

fn main() -> ExitCode {
    match run() {
        Ok(failed_rows) if failed_rows == 0 => ExitCode::SUCCESS,
        Ok(failed_rows) => {
            eprintln!("{failed_rows} row(s) failed; see the flags column");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<usize> {
    let cli = Cli::parse();
    let Cmd::Run {
        config,
        scale,
        out,
        threads,
    } = cli.cmd;

    let cfg_text = match &config {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading the config file {}", path.display()))?,
        None => match scale {
            Scale::Desk => DESK_CONFIG.to_string(),
            Scale::Paper => PAPER_CONFIG.to_string(),
        },
    };
    let cfg = ExperimentConfig::from_json(&cfg_text)?;
    cfg.plan().context("validating the config")?;

    let threads = threads.unwrap_or(cfg.threads);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker thread pool")?;
    }

    let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let result = run_experiment(&cfg)?;
    write_outputs(&out_dir, &result)?;
    println!(
        "wrote {} rows ({} failed) and {} decay fits to {}",
        result.rows.len(),
        result.failed_rows(),
        result.fits.len(),
        out_dir.display()
    );
    Ok(result.failed_rows())
}
