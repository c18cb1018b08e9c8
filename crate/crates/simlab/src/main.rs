use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use residboot::config::{parse_list, ConfigError, ExperimentConfig, SchemeChoice, Study};
use residboot::study::{run_study_with, RunOptions, StudyError, StudyResult};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_WORKER: u8 = 3;

#[derive(Parser)]
#[command(name = "residboot", version, about = "Monte Carlo studies of the residual bootstrap")]
struct Cli {
    #[command(subcommand)]
    study: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bootstrap approximation of the LS and MAD distances.
    Approx(RunArgs),
    /// Bootstrap test of error symmetry in linear regression.
    Symmetry(RunArgs),
    /// Bootstrap goodness-of-fit test of a parametric regression function.
    Gof(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Config file; command-line options override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample sizes, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Levels, comma separated.
    #[arg(long)]
    alpha: Option<String>,
    /// Simulations per sample size and scenario.
    #[arg(long)]
    sims: Option<usize>,
    /// Bootstrap samples per simulation.
    #[arg(long)]
    boot: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// smooth, nonsmooth or both.
    #[arg(long)]
    scheme: Option<SchemeChoice>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-simulation test records as CSV.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Append completed simulations to this file and resume from it.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Suppress progress messages.
    #[arg(long, short)]
    quiet: bool,
}

fn build_config(study: Study, args: &RunArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
            ExperimentConfig::parse(&text, Some(study))
                .map_err(|e| ConfigError::new(format!("{}: {}", path.display(), e.path), e.message))?
        }
        None => ExperimentConfig::defaults(study),
    };
    if let Some(v) = &args.n {
        cfg.ns = parse_list(v, "--n")?;
    }
    if let Some(v) = &args.alpha {
        cfg.alphas = parse_list(v, "--alpha")?;
    }
    if let Some(v) = args.sims {
        cfg.sims = v;
    }
    if let Some(v) = args.boot {
        cfg.boot = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.scheme {
        cfg.schemes = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(result: &StudyResult, args: &RunArgs) -> std::io::Result<()> {
    let table = result.table();
    let text = match args.format {
        Format::Csv => table.to_csv(),
        Format::Markdown => table.to_markdown(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &args.records {
        std::fs::write(path, result.records_csv())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (study, args) = match &cli.study {
        Command::Approx(a) => (Study::Approx, a),
        Command::Symmetry(a) => (Study::Symmetry, a),
        Command::Gof(a) => (Study::Gof, a),
    };
    let cfg = match build_config(study, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let options = RunOptions {
        checkpoint: args.checkpoint.clone(),
        progress: !args.quiet,
    };
    let (result, failure) = match run_study_with(&cfg, &options) {
        Ok(r) => (r, None),
        Err(f) => (*f.partial, Some(f.error)),
    };
    // Partial results are still written so that completed work is kept.
    if let Err(e) = write_outputs(&result, args) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_IO);
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(e @ StudyError::Worker { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_WORKER)
        }
        Some(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
