use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use demon_core::cli::{run, Command, ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "demon", version, about = "Box dynamics with a momentum-selective point interaction")]
struct Args {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one key, e.g. `--set kappa_r=pi/8`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Inverse temperature of the initial state, or `uniform`.
    #[arg(long, global = true)]
    beta: Option<String>,

    #[arg(long, global = true)]
    upsilon0: Option<String>,

    #[arg(long, global = true)]
    half_sites: Option<String>,

    #[arg(long, global = true)]
    output_dir: Option<String>,

    #[arg(long, global = true)]
    workers: Option<String>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Propagate one initial state; write observables and the density carpet.
    Evolve,
    /// Scan the container resonance denominator for real roots.
    Poles,
    /// Entropy series for every value in `sweep_betas` on one eigensystem.
    Sweep,
    /// Print where the lattice dispersion stays parabolic.
    Dispersion,
    /// Tabulate container Green's functions on a grid.
    Greens,
}

fn resolve(args: &Args) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            origin: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.apply_text(&text, &path.display().to_string())?;
    }
    for o in &args.overrides {
        cfg.apply_override(o, "--set")?;
    }
    let flags = [
        ("beta", &args.beta),
        ("upsilon0", &args.upsilon0),
        ("half_sites", &args.half_sites),
        ("output_dir", &args.output_dir),
        ("workers", &args.workers),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.apply(key, v).map_err(|message| ConfigError {
                origin: format!("--{}", key.replace('_', "-")),
                message,
            })?;
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match resolve(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let command = match args.command {
        Cmd::Evolve => Command::Evolve,
        Cmd::Poles => Command::Poles,
        Cmd::Sweep => Command::Sweep,
        Cmd::Dispersion => Command::Dispersion,
        Cmd::Greens => Command::Greens,
    };
    match run(command, &cfg) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
