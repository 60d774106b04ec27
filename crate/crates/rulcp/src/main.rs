use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rulcp::commands;
use rulcp::config::{parse_dataset_id, RunConfig};
use rulcp::{io, CliError};
use rulcp_core::checks::ValidateOptions;

/// Conformal prediction intervals for remaining-useful-lifetime estimation.
#[derive(Debug, Parser)]
#[command(name = "rulcp", version)]
struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Preprocess one C-MAPSS sub-dataset into sample CSVs and a manifest.
    Prepare {
        /// FD001..FD004 or 1..4.
        #[arg(long)]
        dataset: String,
        /// Directory holding train_FD00x.txt, test_FD00x.txt and RUL_FD00x.txt.
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value = "prepared")]
        out: PathBuf,
        /// Seed of the operating-mode clustering.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment and write results.csv, intervals.csv and sorted_rul.csv.
    Run {
        /// Flat TOML configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `data_dir` from the configuration.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Overrides `out_dir` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the number of seeds.
        #[arg(long)]
        seeds: Option<u64>,
    },
    /// Run the built-in property suite.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Calibration/test redraws of the coverage study; 0 skips it.
        #[arg(long, default_value_t = 50)]
        redraws: usize,
        /// Random instances per property.
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
}

fn report(err: &CliError) {
    eprintln!("error: {err}");
    let mut source = std::error::Error::source(err);
    while let Some(cause) = source {
        eprintln!("  caused by: {cause}");
        source = cause.source();
    }
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    let quiet = cli.quiet;
    let progress = move |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    };
    match cli.command {
        Command::Prepare {
            dataset,
            data_dir,
            out,
            seed,
        } => {
            let id = parse_dataset_id(&dataset)
                .ok_or_else(|| CliError::Config(format!("unknown dataset `{dataset}`")))?;
            let output = commands::prepare(id, &data_dir, &out, seed)?;
            for f in &output.files {
                progress(&format!("wrote {}", f.display()));
            }
            print!("{}", output.manifest);
        }
        Command::Run {
            config,
            data_dir,
            out,
            seeds,
        } => {
            let mut config = match config {
                Some(path) => RunConfig::load(&path)?,
                None => RunConfig::default(),
            };
            if data_dir.is_some() {
                config.data_dir = data_dir;
            }
            if let Some(out) = out {
                config.out_dir = out;
            }
            if let Some(n) = seeds {
                config.n_seeds = n;
            }
            let plan = config.plan()?;
            let output = commands::run(&plan, &progress)?;
            for f in &output.files {
                progress(&format!("wrote {}", f.display()));
            }
            print!("{}", io::summary_table(&output.summary));
        }
        Command::Validate {
            seed,
            redraws,
            instances,
        } => {
            let outcomes = commands::validate(&ValidateOptions {
                seed,
                instances,
                coverage_redraws: redraws,
            });
            for o in &outcomes {
                println!("{}", commands::format_outcome(o));
            }
            if outcomes.iter().any(|o| !o.passed) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            report(&err);
            ExitCode::from(err.exit_code())
        }
    }
}
