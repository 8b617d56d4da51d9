//! `radarkit` — configuration-driven experiment runner.
//!
//! ```text
//! radarkit run --config <path> [--seed N] [--out DIR]
//! radarkit run --preset <name> [--seed N] [--out DIR]
//! radarkit presets
//! ```
//!
//! Exit codes: 0 success, 2 validation/configuration error, 3 numerical
//! error, 4 infeasible interference design. Errors are also written to
//! `errors.json` in the output directory when one is known.

mod config;
mod presets;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use radarkit_core::error::Error;
use runner::RunStatus;

#[derive(Parser)]
#[command(name = "radarkit", about = "Counter-adversarial radar inference experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a shipped preset
    Run {
        /// Path to a JSON experiment config
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Name of a shipped preset (see `radarkit presets`)
        #[arg(long)]
        preset: Option<String>,
        /// Override the config's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the shipped presets
    Presets,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Validation(_) | Error::Io(_) | Error::Serde(_) | Error::Csv(_) => 2,
        Error::Numerical(_) | Error::Divergence(_) | Error::Degeneracy(_) | Error::Indeterminate(_) => 3,
    }
}

fn write_error_report(out_dir: Option<&PathBuf>, err: &Error, code: u8) {
    let Some(dir) = out_dir else { return };
    if std::fs::create_dir_all(dir).is_err() {
        return;
    }
    let body = serde_json::json!({
        "error": err.to_string(),
        "exit_code": code,
    });
    let _ = std::fs::write(
        dir.join("errors.json"),
        format!("{}\n", serde_json::to_string_pretty(&body).unwrap_or_default()),
    );
}

fn run_command(
    config_path: Option<PathBuf>,
    preset: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> ExitCode {
    // Resolve the config before touching the filesystem: a malformed config
    // must leave no partial artifacts behind.
    let resolved: Result<(ExperimentConfig, String), Error> = (|| {
        let (mut cfg, label) = match (&config_path, &preset) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)?;
                let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
                (ExperimentConfig::from_json(&text)?, label)
            }
            (None, Some(name)) => {
                let cfg = presets::preset_config(name)
                    .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?;
                (cfg, name.clone())
            }
            _ => {
                return Err(Error::Config("exactly one of --config or --preset is required".into()))
            }
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        Ok((cfg, label))
    })();

    let (mut cfg, label) = match resolved {
        Ok(v) => v,
        Err(err) => {
            eprintln!("{err}");
            let code = exit_code_for(&err);
            write_error_report(out.as_ref(), &err, code);
            return ExitCode::from(code);
        }
    };

    let out_dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(&label));
    cfg.output_dir = Some(out_dir.clone());

    match runner::run(&cfg, &out_dir) {
        Ok(RunStatus::Success) => {
            println!("wrote artifacts to {}", out_dir.display());
            ExitCode::SUCCESS
        }
        Ok(RunStatus::InfeasibleDesign) => {
            println!("wrote artifacts to {} (design infeasible)", out_dir.display());
            ExitCode::from(4)
        }
        Err(err) => {
            eprintln!("{err}");
            let code = exit_code_for(&err);
            write_error_report(Some(&out_dir), &err, code);
            ExitCode::from(code)
        }
    }
}

fn main() -> ExitCode {
    radarkit_core::parallel::install_thread_cap();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, preset, seed, out } => run_command(config, preset, seed, out),
        Command::Presets => {
            for p in presets::PRESETS {
                println!("{:<16} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
    }
}
