use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cnls::config::{parse_config_with_overrides, presets, OutputFormat, RunConfig};
use cnls::experiment::{
    default_convergence_study, run_experiment, run_ground_state, write_ground_state,
};
use cnls::manakov::collision_shift;
use cnls::Error;

/// Exit code when the convergence self-test sees an order outside [1.8, 2.2].
const ORDER_CHECK_FAILED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "cnls",
    version,
    about = "Coupled nonlinear Schrodinger collision experiments",
    after_help = "Any config key can be overridden as --section.key=value, e.g. --grid.N=2048.\n\
                  CNLS_OUTPUT_DIR overrides [output] directory."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured collision and write diagnostics, snapshots and a report.
    Run { config: PathBuf },
    /// Solve the coupled ground state for explicit masses in [groundstate].
    Groundstate { config: PathBuf },
    /// Print the closed-form collision shifts of the integrable case as JSON.
    Manakov {
        #[arg(long, allow_hyphen_values = true)]
        omega1: f64,
        #[arg(long, allow_hyphen_values = true)]
        omega2: f64,
        #[arg(long, allow_hyphen_values = true)]
        v1: f64,
        #[arg(long, allow_hyphen_values = true)]
        v2: f64,
    },
    /// Time-step halving self-test (tau, tau/2, tau/4 against tau/100).
    Convergence { config: PathBuf },
    /// Write the four collision presets as config files.
    Presets {
        #[arg(default_value = ".")]
        dir: PathBuf,
    },
}

fn is_override(arg: &str) -> bool {
    arg.strip_prefix("--")
        .and_then(|rest| rest.split_once('='))
        .is_some_and(|(path, _)| path.contains('.'))
}

fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path)?;
    let mut cfg = parse_config_with_overrides(&text, overrides)?;
    if let Some(dir) = std::env::var_os("CNLS_OUTPUT_DIR") {
        cfg.output.directory = PathBuf::from(dir);
    }
    Ok(cfg)
}

fn execute(command: Command, overrides: &[String]) -> Result<ExitCode, Error> {
    match command {
        Command::Run { config } => {
            let cfg = load(&config, overrides)?;
            let out = run_experiment(&cfg)?;
            println!("{}", out.report.to_json()?);
            if !cfg.output.formats.is_empty() {
                eprintln!("outputs written to {}", cfg.output.directory.display());
            }
        }
        Command::Groundstate { config } => {
            let cfg = load(&config, overrides)?;
            let gs = run_ground_state(&cfg)?;
            let summary = serde_json::json!({
                "omega_1": gs.omega1,
                "omega_2": gs.omega2,
                "iterations": gs.iterations,
                "residual": gs.residual,
                "fd_half_width": gs.grid.half_width,
                "fd_intervals": gs.grid.intervals,
                "final_energy": gs.energy_trace.last(),
            });
            let text = serde_json::to_string_pretty(&summary)?;
            if cfg.output.wants(OutputFormat::Report) || cfg.output.wants(OutputFormat::Snapshots) {
                let dir = &cfg.output.directory;
                fs::create_dir_all(dir)?;
                fs::write(dir.join("groundstate.json"), format!("{text}\n"))?;
                write_ground_state(
                    BufWriter::new(fs::File::create(dir.join("groundstate.csv"))?),
                    &gs,
                )?;
            }
            println!("{text}");
        }
        Command::Manakov {
            omega1,
            omega2,
            v1,
            v2,
        } => {
            let shift = collision_shift(omega1, omega2, v1, v2)?;
            println!("{}", serde_json::to_string_pretty(&shift)?);
        }
        Command::Convergence { config } => {
            let cfg = load(&config, overrides)?;
            let rep = default_convergence_study(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
            for (i, p) in rep.orders.iter().enumerate() {
                eprintln!(
                    "observed order {} -> {}: {p:.4}",
                    rep.taus[i],
                    rep.taus[i + 1]
                );
            }
            if !rep.passes(1.8, 2.2) {
                eprintln!("error: observed order outside [1.8, 2.2]");
                return Ok(ExitCode::from(ORDER_CHECK_FAILED));
            }
        }
        Command::Presets { dir } => {
            fs::create_dir_all(&dir)?;
            for (name, cfg) in presets::all() {
                let path = dir.join(name);
                fs::write(&path, cfg.to_text())?;
                println!("{}", path.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let (overrides, args): (Vec<String>, Vec<String>) =
        std::env::args().partition(|a| is_override(a));
    let cli = Cli::parse_from(args);
    match execute(cli.command, &overrides) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
