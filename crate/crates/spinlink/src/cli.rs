//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use crate::commands;
use crate::config::{load_file, parse_override, FlatMap, RunConfig};
use crate::error::{AppError, AppResult};
use crate::recipes::{run_recipe, RECIPES};

#[derive(Debug, Parser)]
#[command(name = "spinlink", version, about = "Spin entanglement between two cavity quantum dots by homodyne measurement")]
pub struct Cli {
    /// TOML file with flat or nested keys (see README for the schema).
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set pulse.alpha_in=12`. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(short, long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps and scans.
    #[arg(short = 'j', long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SNR, scattered photons and the coupling-regime check for subsystem A.
    Estimate,
    /// Fidelity and acceptance of one configuration.
    Fidelity,
    /// Fidelity over one or two swept config keys (`sweep.x`, `sweep.y`).
    Sweep,
    /// Best amplitude and placement for `strategy.kind`.
    Optimize,
    /// High-fidelity region masks over detuning and amplitude.
    Scan,
    /// Bloch-equation phases, dampings and fidelities against the dispersive model.
    Semiclassical,
    /// Best two-sided fidelity per pulse length.
    TwoSided,
    /// Run a named figure recipe (`--list` to show them).
    Fig {
        recipe: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

fn build_config(cli: &Cli) -> AppResult<RunConfig> {
    let mut map = match &cli.config {
        Some(p) => load_file(p)?,
        None => FlatMap::new(),
    };
    for o in &cli.overrides {
        let (k, v) = parse_override(o)?;
        map.insert(k, v);
    }
    if let Some(p) = &cli.output {
        map.insert("output.path".into(), toml::Value::String(p.display().to_string()));
    }
    if let Some(f) = cli.format {
        let s = match f {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        map.insert("output.format".into(), toml::Value::String(s.into()));
    }
    if let Some(n) = cli.threads {
        map.insert("run.threads".into(), toml::Value::Integer(n as i64));
    }
    RunConfig::from_map(map)
}

pub fn run(cli: &Cli) -> AppResult<()> {
    let cfg = build_config(cli)?;
    let started = Instant::now();
    let table = match &cli.command {
        Command::Estimate => commands::estimate(&cfg)?,
        Command::Fidelity => commands::fidelity(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Optimize => commands::optimize(&cfg)?,
        Command::Scan => commands::scan(&cfg)?,
        Command::Semiclassical => commands::semiclassical(&cfg)?,
        Command::TwoSided => commands::two_sided(&cfg)?,
        Command::Fig { list: true, .. } => {
            let mut out = std::io::stdout().lock();
            for (name, what) in RECIPES {
                let _ = writeln!(out, "{name:6} {what}");
            }
            return Ok(());
        }
        Command::Fig { recipe: None, .. } => return Err(AppError::usage("fig needs a recipe name (try --list)")),
        Command::Fig { recipe: Some(name), .. } => run_recipe(name, cfg.threads)?,
    };
    info!("{} rows in {:.2?}", table.rows.len(), started.elapsed());
    table.write(cfg.format, cfg.output.as_deref())
}

/// Parses `args` and runs; usage errors map to exit code 1.
pub fn main_with_args<I, T>(args: I) -> AppResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version; a closed pipe is not an error here
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(AppError::usage(e.to_string().trim().to_string())),
    };
    run(&cli)
}
