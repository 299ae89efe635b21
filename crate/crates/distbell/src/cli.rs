//! `distbell run | list | validate`.
//!
//! Exit codes: 0 when every expectation holds, 1 when one fails (or the run
//! itself errors), 2 for usage and configuration errors.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, ExperimentName};
use crate::experiments;
use crate::io::Artifacts;

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "distbell", version, about = "Distributional Bellman experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Run(RunArgs),
    /// List the available experiments.
    List,
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment name; see `distbell list`.
    #[arg(long)]
    experiment: Option<ExperimentName>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $DISTBELL_OUT, then ./distbell-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated atom counts.
    #[arg(long, value_delimiter = ',')]
    atoms: Option<Vec<usize>>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    sampled_sweeps: Option<usize>,
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    /// Worker threads for independent cells.
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ExperimentConfig::from_json(&text)
}

fn resolve(args: RunArgs) -> Result<ExperimentConfig, String> {
    let mut config = match (&args.config, args.experiment) {
        (Some(path), _) => load_config(path)?,
        (None, Some(e)) => ExperimentConfig::new(e),
        (None, None) => return Err("--experiment or --config is required".into()),
    };
    if let Some(e) = args.experiment {
        config.experiment = e;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.out.is_some() {
        config.out = args.out;
    }
    let p = &mut config.params;
    if let Some(v) = args.atoms {
        p.atoms = v;
    }
    if let Some(v) = args.sweeps {
        p.sweeps = v;
    }
    if args.sampled_sweeps.is_some() {
        p.sampled_sweeps = args.sampled_sweeps;
    }
    if args.rollouts.is_some() {
        p.rollouts = args.rollouts;
    }
    if args.horizon.is_some() {
        p.horizon = args.horizon;
    }
    if let Some(v) = args.epsilon {
        p.epsilon = v;
    }
    if let Some(v) = args.seeds {
        p.seeds = v;
    }
    if let Some(v) = args.jobs {
        p.jobs = v;
    }
    config.validate()?;
    Ok(config)
}

fn run(args: RunArgs) -> i32 {
    let config = match resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let dir = experiments::report_dir(&config);
    let artifacts = match Artifacts::create(&dir) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let report = match experiments::run_with(&config, artifacts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_EXPECTATION;
        }
    };
    for e in &report.expectations {
        let observed = e.observed.map_or("n/a".to_string(), |o| format!("{o:.6e}"));
        println!("{} {:<52} observed {observed}", if e.passed { "PASS" } else { "FAIL" }, e.id);
    }
    println!("report: {}", dir.join("report.json").display());
    if report.passed {
        EXIT_OK
    } else {
        EXIT_EXPECTATION
    }
}

/// Entry point of the `distbell` binary; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::List => {
            for e in ExperimentName::ALL {
                println!("{:<24} {}", e.as_str(), e.summary());
            }
            EXIT_OK
        }
        Command::Validate { config } => match load_config(&config).and_then(|c| c.validate().map(|()| c)) {
            Ok(c) => {
                println!("ok: {}", c.experiment);
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Command::Run(args) => run(args),
    }
}
