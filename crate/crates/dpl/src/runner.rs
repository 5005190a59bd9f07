//! Executes the checks of a configuration and writes the manifest and reports.

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::checks::{run_check, CheckOutput, Inputs};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::formats::{canonical_json, emit, float, Format};

pub const TOOL: &str = "dpl";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_VAR: &str = "DPL_THREADS";

pub struct CheckRun {
    pub name: String,
    pub output: CheckOutput,
    pub elapsed: Duration,
}

pub struct RunOutcome {
    pub config_hash: String,
    pub runs: Vec<CheckRun>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|r| r.output.report.passed())
    }

    /// The manifest as a JSON value. Wall-clock times are kept out of it so
    /// that identical configurations give identical bytes.
    pub fn manifest(&self) -> Value {
        let checks: Vec<Value> = self
            .runs
            .iter()
            .map(|r| summary(&r.name, &r.output))
            .collect();
        json!({
            "tool": TOOL,
            "version": VERSION,
            "config_hash": self.config_hash,
            "passed": self.passed(),
            "checks": checks,
        })
    }

    pub fn manifest_text(&self) -> String {
        canonical_json(&self.manifest())
    }

    pub fn timings_text(&self) -> String {
        let mut map = Map::new();
        for r in &self.runs {
            map.insert(r.name.clone(), json!(r.elapsed.as_secs_f64()));
        }
        canonical_json(&Value::Object(map))
    }
}

fn summary(name: &str, out: &CheckOutput) -> Value {
    let r = &out.report;
    let mut v = serde_json::to_value(r).expect("report serializes");
    let obj = v.as_object_mut().expect("report is an object");
    obj.remove("rows");
    obj.insert("name".into(), json!(name));
    obj.insert("passed".into(), json!(r.passed()));
    obj.insert("row_count".into(), json!(r.rows.len()));
    v
}

pub fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(format!(
                "{THREADS_VAR} must be a positive integer, found `{s}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs every configured check; results come back in declared order.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let config_hash = cfg.hash()?;
    if cfg.checks.is_empty() {
        return Ok(RunOutcome {
            config_hash,
            runs: Vec::new(),
        });
    }
    let inputs = Inputs::build(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let results: Vec<Result<CheckRun>> = pool.install(|| {
        cfg.checks
            .par_iter()
            .map(|name| {
                let start = Instant::now();
                let output = run_check(name, cfg, &inputs)?;
                Ok(CheckRun {
                    name: name.clone(),
                    output,
                    elapsed: start.elapsed(),
                })
            })
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RunOutcome { config_hash, runs })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `manifest.json`, `timings.json`, `reports/<check>.{json,csv}` and
/// every artifact into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    let reports = dir.join("reports");
    std::fs::create_dir_all(&reports).map_err(|e| Error::io(&reports, e))?;
    for r in &outcome.runs {
        write(
            &reports.join(format!("{}.json", r.name)),
            &emit(&r.output.report, Format::Json),
        )?;
        write(
            &reports.join(format!("{}.csv", r.name)),
            &emit(&r.output.report, Format::Csv),
        )?;
        for (file, text) in &r.output.artifacts {
            write(&dir.join(file), text)?;
        }
    }
    write(&dir.join("timings.json"), &outcome.timings_text())?;
    write(&dir.join("manifest.json"), &outcome.manifest_text())
}

/// One line per check for the terminal.
pub fn summary_lines(outcome: &RunOutcome) -> Vec<String> {
    outcome
        .runs
        .iter()
        .map(|r| {
            let rep = &r.output.report;
            let verdict = if rep.passed() { "PASS" } else { "FAIL" };
            let cap = rep.cap.map(float).unwrap_or_else(|| "-".into());
            let mut line = format!(
                "{verdict} {:<22} constant={} cap={cap}",
                r.name,
                float(rep.empirical_constant)
            );
            if let Some(w) = &rep.worst_region {
                line.push_str(&format!(" at {w}"));
            }
            for (k, v) in &rep.params {
                line.push_str(&format!(" {k}={}", float(*v)));
            }
            if !rep.violations.is_empty() {
                line.push_str(&format!(" violations={}", rep.violations.len()));
            }
            line
        })
        .collect()
}
