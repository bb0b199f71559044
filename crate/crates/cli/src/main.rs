//! `structscan` command-line front end.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::CliError;
use crate::config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "structscan", version, about = "Structured anomaly estimation and Monte-Carlo experiments")]
struct Cli {
    /// Worker threads; defaults to the available cores. Results do not
    /// depend on it.
    #[arg(long, global = true, env = "STRUCTSCAN_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw an anomaly and data (anomalous subset, mixture or Poisson counts).
    Sample(Common),
    /// Estimate the anomaly in an observation file.
    Estimate(Common),
    /// Bias and overlap of an estimator over a grid of means.
    Bias(Common),
    /// Smallest mean at which the scan test meets the error target.
    MuDetect(Common),
    /// Wasserstein distance between mixture and anomalous-subset samples.
    Wasserstein(Common),
    /// Limiting bias of the unstructured scan estimator.
    AsymptoticBias(Common),
    /// Poisson disease-count model: scan or mixture estimator.
    Disease(Common),
    /// Write the membership problem as an LP file.
    ExportIlp(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every random draw derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Family kind; creates a family block when the config has none.
    #[arg(long)]
    family: Option<String>,
    /// Universe size of the family.
    #[arg(long)]
    n: Option<usize>,
    /// mle, gmm, gmm_shifted or regularized.
    #[arg(long)]
    estimator: Option<String>,
    /// Observation CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output artifact path.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Elevated mean.
    #[arg(long)]
    mu: Option<f64>,
    /// Mixing weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// Anomaly size.
    #[arg(long)]
    k: Option<usize>,
}

impl Command {
    fn split(self) -> (&'static str, Common) {
        match self {
            Command::Sample(c) => ("sample", c),
            Command::Estimate(c) => ("estimate", c),
            Command::Bias(c) => ("bias", c),
            Command::MuDetect(c) => ("mu-detect", c),
            Command::Wasserstein(c) => ("wasserstein", c),
            Command::AsymptoticBias(c) => ("asymptotic-bias", c),
            Command::Disease(c) => ("disease", c),
            Command::ExportIlp(c) => ("export-ilp", c),
        }
    }
}

fn resolve(name: &str, c: Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p).map_err(|e| CliError::Config(vec![e]))?,
        None => RunConfig::default(),
    };
    if let Some(cmd) = &cfg.command {
        if cmd != name {
            return Err(CliError::Config(vec![format!(
                "configuration is for `{cmd}`, not `{name}`"
            )]));
        }
    }
    cfg.command = Some(name.to_string());
    cfg.apply(Overrides {
        seed: c.seed,
        family: c.family,
        n: c.n,
        estimator: c.estimator,
        input: c.input,
        output: c.output,
        trials: c.trials,
        mu: c.mu,
        alpha: c.alpha,
        k: c.k,
    });
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let (name, common) = cli.command.split();
    match resolve(name, common).and_then(|cfg| commands::run(name, cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
