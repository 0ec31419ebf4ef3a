mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{ArgAction, Parser, Subcommand};

use commands::Run;
use config::{parse_override, ExperimentConfig};
use error::CliError;

/// Desk-scale optical channel equalization lab.
#[derive(Debug, Parser)]
#[command(name = "eqlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one seed: data, noise, init or shuffle. Repeatable.
    #[arg(long = "seed-override", value_name = "KEY=VALUE", global = true)]
    seed_override: Vec<String>,

    /// Output directory.
    #[arg(long, default_value = "out", global = true)]
    out: PathBuf,

    /// With false, seeds not overridden are drawn from the clock and
    /// recorded in the outputs.
    #[arg(long, default_value_t = true, action = ArgAction::Set, global = true)]
    deterministic: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate symbols and pass them through the link or B2B channel.
    Simulate,
    /// Train the equalizer on the simulated traces.
    Train,
    /// Metrics on the test split plus a constellation scatter CSV.
    Evaluate,
    /// Run the pitfall detectors.
    Audit,
    /// RMpS, BoPs and optional latency of the model topology.
    Complexity,
    /// Merge the stage outputs into one report.
    Report,
}

fn setup(cli: &Cli) -> Result<Run, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if !cli.deterministic {
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        for (i, key) in ["data", "noise", "init", "shuffle"].into_iter().enumerate() {
            cfg.seeds.set(key, nanos.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)))?;
        }
    }
    for o in &cli.seed_override {
        let (k, v) = parse_override(o)?;
        cfg.seeds.set(&k, v)?;
    }
    cfg.apply_seeds();
    cfg.validate()?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", cli.out.display())))?;
    let hash = cfg.hash();
    // effective config, so clock-drawn seeds can be replayed
    let effective = serde_json::json!({ "config_hash": hash, "config": cfg });
    std::fs::write(cli.out.join("config.json"), serde_json::to_string_pretty(&effective)? + "\n")?;
    Ok(Run {
        cfg,
        hash,
        out: cli.out.clone(),
    })
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let run = setup(cli)?;
    match cli.command {
        Command::Simulate => commands::simulate(&run),
        Command::Train => commands::train_cmd(&run),
        Command::Evaluate => commands::evaluate_cmd(&run),
        Command::Audit => commands::audit_cmd(&run),
        Command::Complexity => commands::complexity_cmd(&run),
        Command::Report => commands::report_cmd(&run),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
