//! File formats: MDP JSON, distribution and learning-curve CSV, reports.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use distbell_core::categorical::{CurvePoint, LogitTable};
use distbell_core::{DiscreteDistribution, TabularMdp};
use serde::Serialize;

use crate::report::ExperimentReport;

pub const CURVE_HEADER: [&str; 4] = ["sweep", "mean_d1", "max_d1", "loss"];
pub const DISTRIBUTION_HEADER: [&str; 2] = ["atom", "prob"];

pub fn load_mdp(path: &Path) -> Result<TabularMdp> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing MDP {}", path.display()))
}

pub fn save_mdp(path: &Path, mdp: &TabularMdp) -> Result<()> {
    write_json(path, mdp)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_distribution_csv(path: &Path, d: &DiscreteDistribution) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(DISTRIBUTION_HEADER)?;
    for (z, p) in d.iter() {
        w.write_record([z.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(CURVE_HEADER)?;
    for c in curve {
        w.write_record([c.sweep.to_string(), opt(c.mean_d1), opt(c.max_d1), c.loss.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_logits(path: &Path, theta: &LogitTable) -> Result<()> {
    write_json(path, theta)
}

/// Writes generic CSV tables with a header row.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

/// Artifact directory of one run; remembers what was written, relative to
/// the directory.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    /// Creates `dir` (and parents) and checks that it is writable.
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let probe = dir.join(".write-test");
        fs::write(&probe, b"").with_context(|| format!("{} is not writable", dir.display()))?;
        fs::remove_file(&probe)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Absolute path for `name`, creating its parent directory; records it.
    pub fn path(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        self.files.push(name.to_string());
        Ok(p)
    }

    pub fn into_files(self) -> Vec<String> {
        self.files
    }
}

pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<PathBuf> {
    let path = dir.join("report.json");
    write_json(&path, report)?;
    Ok(path)
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use distbell_core::mdp::build_cliffwalk;

    #[test]
    fn mdp_round_trip() {
        let dir = std::env::temp_dir().join(format!("distbell-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let (mdp, _) = build_cliffwalk();
        let path = dir.join("mdp.json");
        save_mdp(&path, &mdp).unwrap();
        assert_eq!(load_mdp(&path).unwrap(), mdp);
        fs::remove_dir_all(&dir).unwrap();
    }
}
