use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nsaudit::audit::{reverify, BoundReport};
use nsaudit::runner::{
    output_root, preset, run_experiment, sweep, ExperimentConfig, PresetName, RunError, RunOutcome,
};

#[derive(Parser)]
#[command(
    name = "nsaudit",
    version,
    about = "Damped Navier-Stokes runs audited against closed-form bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run a named parameter set, or print it as a config file.
    Preset {
        /// section5, theorem31_demo, fractional_demo, stokes_demo, appendixC_demo
        name: String,
        #[arg(long)]
        emit_config: bool,
        /// Exponent of fractional_demo.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Recompute every entry of a report from its recorded inputs.
    Audit { report: PathBuf },
    /// Run every `*.ini` of a directory in parallel, one output directory each.
    Sweep { config_dir: PathBuf },
}

fn finish(result: Result<RunOutcome, RunError>) -> ExitCode {
    match result {
        Ok(out) => {
            let failed = out.report.entries.iter().filter(|e| !e.satisfied).count();
            println!(
                "{}: {} steps in {:.1} s, U = {:.6e}, E = {:.6e}, {} of {} entries hold",
                out.directory.display(),
                out.steps,
                out.wall_time_seconds,
                out.averages.velocity,
                out.averages.dissipation_rate,
                out.report.entries.len() - failed,
                out.report.entries.len()
            );
            for e in out.report.entries.iter().filter(|e| !e.satisfied) {
                println!("  violated {}: {:.6e} > {:.6e}", e.name, e.lhs, e.rhs);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let parsed = fs::read_to_string(&config)
                .map_err(|source| RunError::Disk {
                    path: config.clone(),
                    source,
                })
                .and_then(|text| ExperimentConfig::parse(&text).map_err(RunError::from));
            finish(parsed.and_then(|c| run_experiment(&c)))
        }
        Command::Preset {
            name,
            emit_config,
            alpha,
        } => {
            let config = match name.parse::<PresetName>().and_then(|p| preset(p, alpha)) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if emit_config {
                print!("{}", config.to_ini());
                return ExitCode::SUCCESS;
            }
            finish(run_experiment(&config))
        }
        Command::Audit { report } => {
            let parsed = fs::read_to_string(&report)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<BoundReport>(&t).map_err(|e| e.to_string()));
            let report = match parsed {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let check = reverify(&report);
            for e in &report.entries {
                println!(
                    "{} {}: {:.6e} <= {:.6e}",
                    if e.satisfied { "holds   " } else { "violated" },
                    e.name,
                    e.lhs,
                    e.rhs
                );
            }
            for m in &check.mismatches {
                println!("mismatch {m}");
            }
            println!(
                "{} entries rechecked, {} mismatches",
                check.checked,
                check.mismatches.len()
            );
            if check.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Sweep { config_dir } => match sweep(&config_dir, &output_root()) {
            Ok(entries) => {
                let mut worst = 0;
                for e in &entries {
                    match &e.result {
                        Ok(_) => println!("ok       {}", e.config.display()),
                        Err(err) => {
                            println!("exit {}   {}: {err}", e.exit_code(), e.config.display())
                        }
                    }
                    worst = worst.max(e.exit_code());
                }
                ExitCode::from(worst as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
    }
}
