use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parlab_cli::error::{EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_PASS};
use parlab_cli::{CliError, CliResult, Experiment, ExperimentConfig, OutputFormat};

#[derive(Parser)]
#[command(name = "parlab", version, about = "Finite field extension experiments for the paraboloid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// INI file; the section named after the subcommand is read.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Largest grid q^d any case may allocate.
    #[arg(long, global = true)]
    grid_cap: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run every exact-identity suite over the grid.
    Verify,
    /// Fit the growth in q of norm lower bounds.
    Scan,
    /// Evaluate the subspace witness and its growth.
    Witness,
    /// Additive energy searches and bound reports.
    Energy,
    /// Regenerate the exponent tables.
    Report,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::Verify => Experiment::Verify,
            Command::Scan => Experiment::Scan,
            Command::Witness => Experiment::Witness,
            Command::Energy => Experiment::Energy,
            Command::Report => Experiment::Report,
        }
    }
}

fn load(cli: &Cli) -> CliResult<ExperimentConfig> {
    let experiment = cli.command.experiment();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?, experiment)?,
        None => ExperimentConfig::defaults(experiment),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(format) = cli.format {
        cfg.format = Some(format);
    }
    if let Some(cap) = cli.grid_cap {
        cfg.grid_cap = cap;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<bool> {
    let cfg = load(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = pool.install(|| parlab_cli::run(&cfg))?;
    let text = report.render(cfg.format())?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    for failure in &report.summary.failed_checks {
        eprintln!("check failed: {failure}");
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
