use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ifno::experiment::{cmd_eval, cmd_generate, cmd_inspect_spectrum, cmd_plot, cmd_train, ExperimentConfig};
use ifno::Error;

#[derive(Parser)]
#[command(name = "ifno", version, about = "Fourier neural operators with incremental spectral learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train and test datasets plus a manifest.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the data seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train a model on generated data.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the experiment seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report the mean and spread of the relative L2 error on a dataset.
    Eval {
        checkpoint: PathBuf,
        dataset: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Dump the frequency strengths of a checkpoint as CSV.
    InspectSpectrum {
        checkpoint: PathBuf,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render metrics, spectrum or modes CSVs to SVG.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load(config: Option<&Path>) -> ifno::Result<ExperimentConfig> {
    match config {
        Some(p) => ExperimentConfig::load(p),
        None => ExperimentConfig::from_toml_str(""),
    }
}

fn run(cli: Cli) -> ifno::Result<()> {
    match cli.command {
        Command::Generate { config, out, seed } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(s) = seed {
                cfg.data.seed = s;
            }
            let out = out.unwrap_or_else(|| cfg.out.clone());
            let r = cmd_generate(&cfg, &out)?;
            println!("wrote {} {} hash={}", r.train.display(), r.test.display(), r.config_hash);
        }
        Command::Train { config, out, seed } => {
            let mut cfg = load(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
                cfg.train.seed = s;
            }
            let out = out.unwrap_or_else(|| cfg.out.clone());
            println!("{}", cmd_train(&cfg, &out)?);
        }
        Command::Eval { checkpoint, dataset, resolution } => {
            println!("{}", cmd_eval(&checkpoint, &dataset, resolution)?);
        }
        Command::InspectSpectrum { checkpoint, out } => {
            let csv = cmd_inspect_spectrum(&checkpoint)?;
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Plot { csv, out } => {
            for p in cmd_plot(&csv, &out)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Error::exit_code(&e) as u8)
        }
    }
}
