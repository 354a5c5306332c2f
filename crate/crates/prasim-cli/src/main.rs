//! Command-line front end: `run` a scenario, `sweep` a parameter, or
//! `summarize` a result table.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for runtime
//! failures.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use prasim_core::channel::export_traces;
use prasim_core::config::{ConfigError, ScenarioConfig, SweepSpec};
use prasim_core::experiment::{
    plan_window_for_export, read_results, run_experiment, summarize, write_results, write_summary,
    ExperimentError, Scenario, World,
};
use prasim_core::planner::export_plan;

#[derive(Parser)]
#[command(name = "prasim", about = "Predictive resource allocation simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and append one result row per
    /// (seed, policy) to the output table.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the base seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Append to an existing table instead of rewriting it.
        #[arg(long)]
        append: bool,
        /// Export the first window's plan per policy to this file.
        #[arg(long)]
        export_plans: Option<PathBuf>,
        /// Export the first window's true large-scale traces to this file.
        #[arg(long)]
        export_traces: Option<PathBuf>,
    },
    /// Run a one-parameter sweep described by a sweep spec file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        append: bool,
    },
    /// Aggregate a result table into per-(policy, load, q) summary rows.
    Summarize {
        #[arg(long)]
        input: PathBuf,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config_error = e.chain().any(|c| {
                c.downcast_ref::<ConfigError>().is_some()
                    || matches!(
                        c.downcast_ref::<ExperimentError>(),
                        Some(ExperimentError::Config(_))
                    )
            });
            if config_error {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            append,
            export_plans,
            export_traces: export_traces_path,
        } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.run.seed = s;
            }
            let records = run_experiment(&cfg, None)?;
            let mut buf = Vec::new();
            write_results(&mut buf, &records, true)?;
            write_table(&out, append, &buf)?;
            if export_plans.is_some() || export_traces_path.is_some() {
                export_artifacts(&cfg, export_plans, export_traces_path)?;
            }
            eprintln!("wrote {} result rows to {}", records.len(), out.display());
            Ok(())
        }
        Command::Sweep {
            config,
            spec,
            out,
            append,
        } => {
            let cfg = ScenarioConfig::load(&config)?;
            let sweep = SweepSpec::load(&spec)?;
            let records = run_experiment(&cfg, Some(&sweep))?;
            let mut buf = Vec::new();
            write_results(&mut buf, &records, true)?;
            write_table(&out, append, &buf)?;
            eprintln!("wrote {} result rows to {}", records.len(), out.display());
            Ok(())
        }
        Command::Summarize { input, out } => {
            let file = std::fs::File::open(&input)?;
            let records = read_results(std::io::BufReader::new(file))?;
            let rows = summarize(&records);
            match out {
                Some(path) => {
                    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
                    write_summary(&mut w, &rows)?;
                }
                None => {
                    let stdout = std::io::stdout();
                    write_summary(&mut stdout.lock(), &rows)?;
                }
            }
            Ok(())
        }
    }
}

fn write_table(path: &PathBuf, append: bool, table: &[u8]) -> std::io::Result<()> {
    if append && path.exists() {
        // Rows only; the header is already in place.
        let mut file = std::fs::OpenOptions::new().append(true).open(path)?;
        let text = String::from_utf8_lossy(table);
        for line in text.lines().skip(1) {
            writeln!(file, "{line}")?;
        }
        Ok(())
    } else {
        std::fs::write(path, table)
    }
}

/// Write the first window's plan (per policy) and true traces for seed 0 of
/// the configured run, mirroring what the simulator would use.
fn export_artifacts(
    cfg: &ScenarioConfig,
    plans: Option<PathBuf>,
    traces: Option<PathBuf>,
) -> anyhow::Result<()> {
    let scen = Scenario::build(cfg)?;
    let world = World::generate(&scen, cfg.run.seed, 0);
    if let Some(path) = traces {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        export_traces(&mut w, &world.true_traces)?;
    }
    if let Some(path) = plans {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        for policy in cfg.policies() {
            if let Some((plan, level)) = plan_window_for_export(&scen, &world, policy)? {
                export_plan(&mut w, policy.name(), &plan, Some(level))?;
            }
        }
    }
    Ok(())
}
