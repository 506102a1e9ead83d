use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dhl_cli::{execute, parse_config_with, ConfigError, Mode, RunError};

/// Sweeps of the dissipative Dicke lattice model.
#[derive(Parser, Debug)]
#[command(name = "dhl", version)]
struct Cli {
    /// spectrum, psi-time, psi-hopping, critical or phase-diagram.
    #[arg(value_name = "MODE")]
    mode_arg: Option<String>,
    #[arg(long = "mode", value_name = "MODE", conflicts_with = "mode_arg")]
    mode_flag: Option<String>,
    /// JSON config file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set gamma=0.02` or `--set time.count=50`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.summary());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main(cli: Cli) -> Result<(), RunError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            RunError::Config(ConfigError::Invalid {
                field: "--config".into(),
                message: format!("{}: {e}", path.display()),
            })
        })?,
        None => "{}".to_string(),
    };
    let mode = cli
        .mode_arg
        .or(cli.mode_flag)
        .map(|m| m.parse::<Mode>())
        .transpose()?;
    let mut overrides = cli.set;
    if let Some(out) = &cli.out {
        overrides.push(format!("out={}", serde_json::Value::from(out.display().to_string())));
    }
    if let Some(w) = cli.workers {
        overrides.push(format!("workers={w}"));
    }
    let config = parse_config_with(&text, mode, &overrides)?;
    let out = config.out.clone().ok_or_else(|| {
        RunError::Config(ConfigError::Invalid {
            field: "out".into(),
            message: "no output path (use --out)".into(),
        })
    })?;
    let workers = config.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let table = execute(&config, &out, workers)?;
    eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
    Ok(())
}

