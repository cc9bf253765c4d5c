use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use fuzzy_agents::config::SystemConfig;
use fuzzy_agents::runtime::{Scenario, Stepping, TraceFormat};
use fuzzy_agents::watering::{self, REFERENCE_SCENARIO};

#[derive(Parser)]
#[command(name = "fuzzy-agents", version, about = "Fuzzy multi-agent watering system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario through the agents and write the trace.
    Run {
        /// System config (defaults to the built-in watering config).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scenario file (defaults to the built-in watering scenario).
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Step agents on the rayon thread pool.
        #[arg(long)]
        parallel: bool,
    },
    /// Compute the watering duration directly from crisp inputs.
    Infer {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        temperature: f64,
        #[arg(long, allow_negative_numbers = true)]
        humidity: f64,
    },
    /// Check a config's structure and calibration points.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

impl From<Format> for TraceFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => TraceFormat::Csv,
            Format::Jsonl => TraceFormat::JsonLines,
        }
    }
}

enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

fn load_config(path: Option<&Path>) -> Result<SystemConfig, Failure> {
    let config = match path {
        Some(p) => SystemConfig::load(p).with_context(|| format!("config {}", p.display())),
        None => Ok(watering::reference_config()),
    }
    .map_err(Failure::Validation)?;
    config.validate().map_err(|e| Failure::Validation(e.into()))?;
    Ok(config)
}

fn load_scenario(path: Option<&Path>) -> Result<Scenario, Failure> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("scenario {}", p.display()))
            .map_err(Failure::Validation)?,
        None => REFERENCE_SCENARIO.to_string(),
    };
    Scenario::from_json(&text).map_err(|e| Failure::Validation(anyhow::anyhow!("scenario: {e}")))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            scenario,
            out,
            format,
            seed,
            parallel,
        } => {
            let config = load_config(config.as_deref())?;
            let scenario = load_scenario(scenario.as_deref())?;
            let stepping = if parallel { Stepping::Parallel } else { Stepping::Serial };
            let system = fuzzy_agents::runtime::run(&scenario, &config, seed, stepping)
                .map_err(|e| Failure::Runtime(e.into()))?;
            let bytes = system
                .trace()
                .to_bytes(format.into())
                .map_err(|e| Failure::Runtime(e.into()))?;
            std::fs::write(&out, bytes)
                .with_context(|| format!("writing {}", out.display()))
                .map_err(Failure::Runtime)?;
            match config.rule_base.as_ref().and_then(|rb| system.last_effect(&rb.output)) {
                Some(d) => println!("duration: {d}"),
                None => println!("duration: none"),
            }
            Ok(())
        }
        Command::Infer {
            config,
            temperature,
            humidity,
        } => {
            let config = load_config(config.as_deref())?;
            let inference = watering::infer_duration(&config, temperature, humidity)
                .map_err(|e| Failure::Runtime(e.into()))?;
            println!("{}", inference.value);
            Ok(())
        }
        Command::Validate { config } => {
            let config = load_config(config.as_deref())?;
            println!(
                "ok: {} variables, {} agents, {} calibration points",
                config.variables.len(),
                config.agents.len(),
                config.calibration.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
