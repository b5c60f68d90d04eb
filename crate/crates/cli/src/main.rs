//! `zeno`: sweeps, the reference optimum table, optimum reports and loss-model studies from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::{Command, RawConfig, Value};
use error::{CliError, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Sweep,
    Opt,
    Table1,
    General,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "zeno",
    version,
    about = "Quantum Zeno survival probabilities behind lossy mirrors"
)]
struct Cli {
    command: CommandArg,
    /// Flat TOML file of key = value pairs; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Total rotation angle in radians (default π/2).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// |T↑|² of a diagonal mirror.
    #[arg(long)]
    t_up2: Option<f64>,
    /// |T↓|² of a diagonal mirror.
    #[arg(long)]
    t_down2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phase_up: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phase_down: Option<f64>,
    #[arg(long)]
    n_min: Option<u64>,
    /// Last N of a sweep, or the search ceiling for opt and table1.
    #[arg(long)]
    n_max: Option<u64>,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl Cli {
    fn command(&self) -> Command {
        match self.command {
            CommandArg::Sweep => Command::Sweep,
            CommandArg::Opt => Command::Opt,
            CommandArg::Table1 => Command::Table1,
            CommandArg::General => Command::General,
        }
    }

    fn overrides(&self) -> Vec<(&'static str, Value)> {
        let mut v = Vec::new();
        let reals = [
            ("theta", self.theta),
            ("t_up2", self.t_up2),
            ("t_down2", self.t_down2),
            ("t_up_phase", self.phase_up),
            ("t_down_phase", self.phase_down),
        ];
        for (key, x) in reals {
            if let Some(x) = x {
                v.push((key, Value::Num(x)));
            }
        }
        for (key, n) in [("n_min", self.n_min), ("n_max", self.n_max)] {
            if let Some(n) = n {
                v.push((key, Value::Int(i64::try_from(n).unwrap_or(i64::MAX))));
            }
        }
        if let Some(out) = &self.out {
            v.push(("out", Value::Str(out.to_string_lossy().into_owned())));
        }
        if let Some(f) = self.format {
            let s = match f {
                FormatArg::Csv => "csv",
                FormatArg::Json => "json",
            };
            v.push(("format", Value::Str(s.into())));
        }
        v
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let mut raw = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            config::parse_file(&text)?
        }
        None => RawConfig::new(),
    };
    for (key, value) in cli.overrides() {
        raw.insert(key.to_string(), value);
    }
    let cfg = config::resolve(cli.command(), &raw)?;
    let text = commands::run(&cfg)?;
    output::emit(&text, cfg.output_path.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zeno: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
