use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dtn_afem_cli::config::ConfigError;
use dtn_afem_cli::{parse_config, run, Mode, RunError};

#[derive(Parser)]
#[command(name = "dtn-afem", version, about = "Adaptive DtN finite elements for acoustic-elastic gratings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario described by a configuration file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        export_vtk: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Adaptive,
    Uniform,
    Both,
}

fn solve(config: PathBuf, mode: Option<ModeArg>, export_vtk: bool, out: Option<PathBuf>) -> Result<String, RunError> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| ConfigError::Parse { line: 0, message: format!("cannot read {}: {e}", config.display()) })?;
    let mut cfg = parse_config(&text)?;
    if let Some(m) = mode {
        cfg.mode = match m {
            ModeArg::Adaptive => Mode::Adaptive,
            ModeArg::Uniform => Mode::Uniform,
            ModeArg::Both => Mode::Both,
        };
    }
    cfg.export_vtk |= export_vtk;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    let outputs = run(&cfg)?;
    Ok(dtn_afem_cli::run::summary(&outputs))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Solve { config, mode, export_vtk, out } = cli.command;
    match solve(config, mode, export_vtk, out) {
        Ok(table) => {
            print!("{table}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
