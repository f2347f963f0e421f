use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

/// Control-traffic workload simulator for beam-steering metasurfaces.
#[derive(Debug, Parser)]
#[command(name = "hsf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its traffic trace.
    Simulate {
        /// Scenario config (JSON), or an existing trace to re-run from its header.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides scenario.rng_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides outputs.trace.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dotted overrides, e.g. surface.n_states=8.
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Compute the workload report and heat map of a trace.
    Metrics {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        heatmap: Option<PathBuf>,
        /// Heat-map format: csv or pgm.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Changed-cell fraction between two steering directions.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        from_theta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to_theta: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        from_phi: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        to_phi: f64,
        /// Print every consecutive pair from --from-theta (default 85) down to 0.
        #[arg(long, value_name = "STEP")]
        grid: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the built-in default config.
    Defaults {
        #[arg(long, default_value = "A")]
        case: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            overrides,
        } => commands::simulate(config.as_deref(), seed, out.as_deref(), &overrides),
        Command::Metrics {
            trace,
            report,
            heatmap,
            format,
        } => commands::metrics(&trace, &report, heatmap.as_deref(), &format),
        Command::Sweep {
            from_theta,
            to_theta,
            from_phi,
            to_phi,
            grid,
            config,
        } => commands::sweep(
            commands::SweepArgs {
                from_theta,
                to_theta,
                from_phi,
                to_phi,
                grid,
            },
            config.as_deref(),
        ),
        Command::Defaults { case } => commands::defaults(&case),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
