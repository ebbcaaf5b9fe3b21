//! Solver benchmark runs on a bundle.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use stochascope_core::solvers::TraceRecord;
use stochascope_core::{run_experiment, SolverConfig};

use crate::bundle::ProblemBundle;
use crate::io::{atomic_write, csv_bytes, num, opt_num, write_json};

pub const TRACE_SCHEMA: &str = "stochascope.trace.v1";
pub const RESULTS_SCHEMA: &str = "stochascope.results.v1";

/// A configs file holds either a bare array or `{"configs": [...]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigsFile {
    List(Vec<SolverConfig>),
    Wrapped { configs: Vec<SolverConfig> },
}

pub fn parse_configs(text: &str) -> Result<Vec<SolverConfig>> {
    let configs = match serde_json::from_str(text).context("parsing solver configs")? {
        ConfigsFile::List(c) | ConfigsFile::Wrapped { configs: c } => c,
    };
    anyhow::ensure!(!configs.is_empty(), "no solver configs given");
    Ok(configs)
}

pub fn read_configs(path: &Path) -> Result<Vec<SolverConfig>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_configs(&text)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub index: usize,
    pub label: String,
    pub config: SolverConfig,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
    pub records: Vec<TraceRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: String,
    pub bundle: String,
    pub runs: Vec<RunResult>,
}

impl SolveReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn trace_csv(records: &[TraceRecord]) -> Result<Vec<u8>> {
    let header = ["epoch", "objective", "est_error", "wall_ms"].map(String::from);
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| vec![num(r.epoch), num(r.objective), opt_num(r.est_error), num(r.wall_ms)])
        .collect();
    csv_bytes(TRACE_SCHEMA, &header, &rows)
}

/// Runs every config (in parallel), writes one trace CSV per successful run
/// and `results.json` with all runs, including failures.
pub fn cmd_solve(bundle: &ProblemBundle, configs: &[SolverConfig], out_dir: &Path) -> Result<(PathBuf, SolveReport)> {
    let outputs = run_experiment(&bundle.problem, configs);
    let mut runs = Vec::with_capacity(configs.len());
    for (i, (cfg, out)) in configs.iter().zip(outputs).enumerate() {
        let label = cfg.label();
        match out {
            Ok(o) => {
                let name = format!("trace_{i:02}_{}.csv", file_label(&label));
                atomic_write(&out_dir.join(&name), &trace_csv(&o.trace.records)?)?;
                log::info!("{label}: {} records", o.trace.records.len());
                runs.push(RunResult {
                    index: i,
                    label,
                    config: cfg.clone(),
                    status: "ok".into(),
                    error: None,
                    trace_file: Some(name),
                    records: o.trace.records,
                });
            }
            Err(e) => {
                log::warn!("{label} failed: {e}");
                runs.push(RunResult {
                    index: i,
                    label,
                    config: cfg.clone(),
                    status: "error".into(),
                    error: Some(e.to_string()),
                    trace_file: None,
                    records: Vec::new(),
                });
            }
        }
    }
    let report = SolveReport {
        schema: RESULTS_SCHEMA.into(),
        bundle: bundle.manifest.label.clone(),
        runs,
    };
    let path = out_dir.join("results.json");
    write_json(&path, &report)?;
    Ok((path, report))
}
