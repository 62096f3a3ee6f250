mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use chloride_core::config::RunConfig;
use chloride_core::Error;
use clap::{Parser, Subcommand};

/// Mesoscale chloride ingress into concrete with a tendon duct.
#[derive(Debug, Parser)]
#[command(name = "chloride", version)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for artifacts; created if missing.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides geometry.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides solver.end_time_years.
    #[arg(long, global = true)]
    years: Option<f64>,
    /// Overrides solver.h_mm.
    #[arg(long, global = true)]
    resolution: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the aggregate mesostructure and its material grid.
    Generate,
    /// Generate, then solve and dump fields at the output times.
    Simulate,
    /// Reduce field dumps to per-depth maxima and threshold verdicts.
    Profile {
        /// Directory holding `field_t*.csv`; defaults to --out-dir.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Fast 1D estimate without a mesostructure.
    Predict {
        /// Probe depths in mm; defaults to analysis.probe_depths_mm.
        #[arg(long, value_delimiter = ',')]
        depths: Vec<f64>,
    },
    /// Run the verification ladder and print a pass/fail table.
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Simulate => "simulate",
            Command::Profile { .. } => "profile",
            Command::Predict { .. } => "predict",
            Command::Validate => "validate",
        }
    }
}

fn exit_code(e: &Error) -> (u8, &'static str) {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::Io(_) => (2, "config"),
        Error::PackingIncomplete { .. } => (3, "packing"),
        Error::LinearSolveFailure { .. } => (4, "solver"),
        Error::EmptyField
        | Error::DepthOutOfRange { .. }
        | Error::InsufficientOverlap { .. }
        | Error::Parse { .. } => (5, "analysis"),
    }
}

fn load_config(cli: &Cli) -> chloride_core::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(years) = cli.years {
        cfg.set_years(years);
    }
    if let Some(h) = cli.resolution {
        cfg.set_resolution(h);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> chloride_core::Result<bool> {
    let cfg = load_config(cli)?;
    std::fs::create_dir_all(&cli.out_dir)
        .map_err(|e| Error::Io(format!("{}: {e}", cli.out_dir.display())))?;
    let out = &cli.out_dir;
    match &cli.command {
        Command::Generate => commands::generate(&cfg, out).map(|_| true),
        Command::Simulate => commands::simulate(&cfg, out).map(|_| true),
        Command::Profile { input } => commands::profile(&cfg, input.as_deref().unwrap_or(out), out).map(|_| true),
        Command::Predict { depths } => commands::predict(&cfg, depths, out).map(|_| true),
        Command::Validate => commands::validate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            let record = serde_json::json!({
                "code": 5,
                "kind": "analysis",
                "message": "verification ladder has failing checks",
                "context": cli.command.name(),
            });
            eprintln!("{record}");
            ExitCode::from(5)
        }
        Err(e) => {
            let (code, kind) = exit_code(&e);
            let record = serde_json::json!({
                "code": code,
                "kind": kind,
                "message": e.to_string(),
                "context": cli.command.name(),
            });
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}
