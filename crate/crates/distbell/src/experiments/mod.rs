//! Experiment runners. Each fills a [`Ctx`] with expectations, result tables
//! and artifacts; [`run`] turns that into a written report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;

use crate::config::{ExperimentConfig, ExperimentName};
use crate::io::{self, Artifacts};
use crate::report::{ExperimentReport, ReportBuilder};

pub mod battery;
pub mod cliffwalk;
pub mod contraction;
pub mod fixed_point;
pub mod noncontraction;
pub mod nonstationary;
pub mod oscillation;
pub mod sample_wasserstein;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DISTBELL_OUT";
pub const DEFAULT_OUT: &str = "distbell-out";

pub struct Ctx<'a> {
    pub config: &'a ExperimentConfig,
    pub report: ReportBuilder,
    pub artifacts: Artifacts,
}

/// `config.out`, else `$DISTBELL_OUT`, else `./distbell-out`.
pub fn output_root(config: &ExperimentConfig) -> PathBuf {
    config
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Directory holding the report of `config`.
pub fn report_dir(config: &ExperimentConfig) -> PathBuf {
    output_root(config).join(config.experiment.as_str())
}

/// Validates `config`, runs the experiment and writes `report.json`.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let dir = report_dir(config);
    let artifacts = Artifacts::create(&dir)?;
    run_with(config, artifacts)
}

/// Runs `config`, writing artifacts and `report.json` into `artifacts`.
pub fn run_with(config: &ExperimentConfig, artifacts: Artifacts) -> Result<ExperimentReport> {
    config.validate().map_err(anyhow::Error::msg)?;
    let start = Instant::now();
    let mut ctx = Ctx { config, report: ReportBuilder::default(), artifacts };
    match config.experiment {
        ExperimentName::CliffwalkAtoms => cliffwalk::run(&mut ctx)?,
        ExperimentName::ContractionSuite => contraction::run(&mut ctx)?,
        ExperimentName::NoncontractionDemo => noncontraction::run(&mut ctx)?,
        ExperimentName::OscillationDemo => oscillation::run(&mut ctx)?,
        ExperimentName::NonstationaryDemo => nonstationary::run(&mut ctx)?,
        ExperimentName::SampleWassersteinDemo => sample_wasserstein::run(&mut ctx)?,
        ExperimentName::FixedPointCheck => fixed_point::run(&mut ctx)?,
    }
    let Ctx { report, artifacts, .. } = ctx;
    let dir = artifacts.dir().to_path_buf();
    let out = ExperimentReport {
        experiment: config.experiment,
        config: config.clone(),
        passed: report.expectations.iter().all(|e| e.passed),
        expectations: report.expectations,
        results: report.results,
        files: artifacts.into_files(),
        duration_secs: start.elapsed().as_secs_f64(),
        timings: report.timings,
    };
    io::write_report(&dir, &out)?;
    Ok(out)
}

/// Runs `config` with its report written under `root` regardless of
/// `config.out`.
pub fn run_at(config: &ExperimentConfig, root: &Path) -> Result<ExperimentReport> {
    let artifacts = Artifacts::create(&root.join(config.experiment.as_str()))?;
    run_with(config, artifacts)
}
