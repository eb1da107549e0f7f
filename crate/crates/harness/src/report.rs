//! Suite reports, their JSON/CSV forms and failure artifacts.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use setval::set_field::SetField;

use crate::config::ExperimentConfig;
use crate::trials::TrialKind;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<TrialKind>,
    /// Free-form description: grid, dimensions, fixture, level.
    pub label: String,
    pub values: BTreeMap<String, f64>,
    pub passed: bool,
}

/// One asserted inequality `measured <= bound`.
///
/// When `series` is set, `measured` is the max of that value over the trial
/// records carrying it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `bound - measured >= -tol`.
    pub fn new(name: impl Into<String>, measured: f64, bound: f64, tol: f64) -> Self {
        let slack = bound - measured;
        Self { name: name.into(), series: None, measured, bound, slack, passed: slack >= -tol }
    }

    /// `max` of `series` over `trials` against `bound`.
    pub fn over(name: impl Into<String>, series: &str, trials: &[TrialRecord], bound: f64, tol: f64) -> Self {
        let mut c = Self::new(name, series_max(trials, series), bound, tol);
        c.series = Some(series.to_string());
        c
    }

    /// A pass/fail fact with no natural bound, stored as `measured = 0` or 1
    /// against bound 0.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 0.0 } else { 1.0 }, 0.0, 0.0)
    }
}

pub fn series_max(trials: &[TrialRecord], series: &str) -> f64 {
    trials.iter().filter_map(|t| t.values.get(series)).fold(0.0, |m, &x| m.max(x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Aggregate {
    pub fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { checks, passed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub suite: String,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    pub fn new(suite: &str, config: &ExperimentConfig, trials: Vec<TrialRecord>, checks: Vec<Check>) -> Self {
        let mut config = config.clone();
        config.out = None;
        Self {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            suite: suite.to_string(),
            config,
            trials,
            aggregate: Aggregate::new(checks),
        }
    }

    pub fn passed(&self) -> bool {
        self.aggregate.passed
    }

    /// Failing checks, for the verdict line.
    pub fn failures(&self) -> Vec<&Check> {
        self.aggregate.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Long format: one row per trial value, then one per check.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,index,label,name,value,bound,slack,passed\n");
        for t in &self.trials {
            for (k, v) in &t.values {
                out.push_str(&format!("trial,{},{},{},{},,,{}\n", t.index, csv_field(&t.label), csv_field(k), v, t.passed));
            }
        }
        for (i, c) in self.aggregate.checks.iter().enumerate() {
            out.push_str(&format!(
                "check,{i},{},{},{},{},{},{}\n",
                csv_field(c.series.as_deref().unwrap_or("")),
                csv_field(&c.name),
                c.measured,
                c.bound,
                c.slack,
                c.passed
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A point of plot data: CSV columns `x, series, value`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    pub series: String,
    pub value: f64,
}

pub fn plot_csv(points: &[PlotPoint]) -> String {
    let mut out = String::from("x,series,value\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.x, csv_field(&p.series), p.value));
    }
    out
}

/// A reproducer for one failing trial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FailureArtifact {
    pub suite: String,
    pub trial: TrialRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<SetField>,
    pub config: ExperimentConfig,
}

/// Everything a suite run produces.
#[derive(Clone, Debug)]
pub struct SuiteOutput {
    pub report: ExperimentReport,
    pub plot: Vec<PlotPoint>,
    pub failures: Vec<FailureArtifact>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes the report (and plot data / failure artifacts) under `dir`,
/// returning the report path.
pub fn write_outputs(out: &SuiteOutput, dir: &Path, format: Format, plot: bool) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let suite = &out.report.suite;
    let path = match format {
        Format::Json => {
            let p = dir.join(format!("{suite}.json"));
            write_file(&p, out.report.to_json().as_bytes())?;
            p
        }
        Format::Csv => {
            let p = dir.join(format!("{suite}.csv"));
            write_file(&p, out.report.to_csv().as_bytes())?;
            p
        }
    };
    if plot {
        write_file(&dir.join(format!("{suite}.plot.csv")), plot_csv(&out.plot).as_bytes())?;
    }
    if !out.failures.is_empty() {
        let fdir = dir.join("failures");
        std::fs::create_dir_all(&fdir)?;
        for f in &out.failures {
            let p = fdir.join(format!("{suite}-{}.json", f.trial.index));
            let text = serde_json::to_string_pretty(f).expect("artifacts serialize");
            write_file(&p, text.as_bytes())?;
        }
    }
    Ok(path)
}

fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, x: f64) -> TrialRecord {
        TrialRecord { index: i, kind: None, label: "l".into(), values: [("r".to_string(), x)].into(), passed: true }
    }

    #[test]
    fn series_checks_recompute_from_trials() {
        let trials = vec![rec(0, 0.5), rec(1, 0.9), rec(2, 0.2)];
        let c = Check::over("max r", "r", &trials, 1.0, 1e-9);
        assert_eq!(c.measured, 0.9);
        assert!(c.passed);
        assert!(!Check::over("max r", "r", &trials, 0.8, 1e-9).passed);
    }

    #[test]
    fn csv_quotes_commas() {
        let r = ExperimentReport::new("s", &ExperimentConfig::default(), vec![rec(0, 1.0)], vec![]);
        let csv = r.to_csv();
        assert!(csv.starts_with("section,"));
        assert!(csv.contains("trial,0,l,r,1,,,true"));
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }

    #[test]
    fn report_round_trips() {
        let r = ExperimentReport::new("s", &ExperimentConfig::default(), vec![rec(0, 0.25)], vec![Check::flag("f", true)]);
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(r, back);
    }
}
