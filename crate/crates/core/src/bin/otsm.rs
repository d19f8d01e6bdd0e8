use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use otsm::control::{classic_existence_condition, existence_condition, SurfaceSpec};
use otsm::scenario::{
    format_number, load_scenario, load_scenario_dir, run_batch, run_sweep, BatchSummary, Scenario,
    SweepSpec,
};
use otsm::Error;

#[derive(Parser)]
#[command(
    name = "otsm",
    version,
    about = "Optimal terminal sliding mode simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its trajectory and report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate every `*.cfg` scenario in a directory.
    Batch {
        #[arg(long)]
        config_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Vary one numeric key of a scenario.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted key, e.g. `surface.alpha`.
        #[arg(long)]
        param: String,
        /// Comma separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a scenario and print its existence and disturbance-bound verdicts.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn print_summary(summary: &BatchSummary) {
    for e in &summary.entries {
        match &e.error {
            None => println!(
                "{:<32} {:<12} settling={:<10} crossings={}",
                e.name,
                e.mode.map(|m| m.to_string()).unwrap_or_default(),
                e.settling_time
                    .map(format_number)
                    .unwrap_or_else(|| "-".into()),
                e.crossings.unwrap_or(0),
            ),
            Some(err) => println!("{:<32} FAILED       {err}", e.name),
        }
    }
}

fn simulate_one(config: &Path, out: &Path) -> Result<i32, Error> {
    let sc = load_scenario(config)?;
    // a single scenario still goes through the batch runner so the files
    // match what `batch` writes
    let summary = run_batch(std::slice::from_ref(&sc), out)?;
    print_summary(&summary);
    Ok(summary.exit_code())
}

fn check(sc: &Scenario) {
    println!("scenario: {}", sc.name);
    println!("normalized configuration:\n{}", sc.to_config_string());
    match sc.surface {
        SurfaceSpec::Optimal { alpha } => {
            let ok = existence_condition(alpha);
            println!(
                "existence condition (alpha > 0.5): {} (alpha = {}, expected {} mode)",
                if ok { "satisfied" } else { "violated" },
                format_number(alpha),
                if ok { "terminal" } else { "twisting" }
            );
        }
        SurfaceSpec::Classic {
            beta,
            q_over_p: 0.5,
        } => {
            let gain = sc.plant.accel_max();
            println!(
                "existence condition (beta^2 < 2 U/m): {} (beta = {}, U/m = {})",
                if classic_existence_condition(gain, beta) {
                    "satisfied"
                } else {
                    "violated"
                },
                format_number(beta),
                format_number(gain)
            );
        }
        _ => println!("existence condition: not evaluated for this surface"),
    }
    println!(
        "perturbation bound (|xi| < U): satisfied ({} < {})",
        format_number(sc.perturbation.amplitude()),
        format_number(sc.plant.u_max())
    );
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Simulate { config, out } => simulate_one(&config, &out),
        Command::Batch { config_dir, out } => {
            let scenarios = load_scenario_dir(&config_dir)?;
            let summary = run_batch(&scenarios, &out)?;
            print_summary(&summary);
            Ok(summary.exit_code())
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let base = load_scenario(&config)?;
            let table = run_sweep(
                &SweepSpec {
                    base,
                    parameter: param,
                    values,
                },
                &out,
            )?;
            print!("{}", String::from_utf8_lossy(&table.to_csv()?));
            Ok(table.exit_code())
        }
        Command::Check { config } => {
            let sc = load_scenario(&config)?;
            check(&sc);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
