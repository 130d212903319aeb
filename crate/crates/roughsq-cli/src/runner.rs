//! Running experiments and writing their artifacts.
//!
//! Each run directory holds `report.json` (the deterministic record),
//! `report.txt` (the rendering), one CSV per table, and `metadata.json`
//! with everything that differs between identical runs (wall-clock,
//! timestamps, thread count).

use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use roughsq::verify::{self, ExperimentReport, Table};

use crate::config::RunConfig;
use crate::experiments;

/// Outcome of a run: overall status and the names of failing verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub failures: Vec<String>,
    pub summary: String,
}

#[derive(Serialize)]
struct Metadata<'a> {
    experiment: &'a str,
    tier: String,
    seed: u64,
    version: &'static str,
    threads: usize,
    started_unix_seconds: u64,
    wall_clock_seconds: f64,
}

fn file_name(table: &str) -> String {
    table.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn write_table(dir: &Path, t: &Table) -> Result<()> {
    let path = dir.join(format!("{}.csv", file_name(&t.name)));
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&t.columns)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Write one report into `dir`.
pub fn write_report(dir: &Path, cfg: &RunConfig, report: &ExperimentReport, started: u64) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;
    fs::write(dir.join("report.txt"), report.render())?;
    for t in &report.tables {
        write_table(dir, t)?;
    }
    let meta = Metadata {
        experiment: &report.id,
        tier: cfg.tier.to_string(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        threads: rayon::current_num_threads(),
        started_unix_seconds: started,
        wall_clock_seconds: report.wall_clock,
    };
    fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn single(cfg: &RunConfig, report: ExperimentReport, started: u64) -> Result<Outcome> {
    write_report(&cfg.out, cfg, &report, started)?;
    let failures: Vec<String> = report.failures().map(|v| format!("{}: {}", report.id, v.name)).collect();
    Ok(Outcome { passed: failures.is_empty(), failures, summary: report.render() })
}

/// Run the experiment, criterion or `all` named by `cfg.experiment`.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let started = now();
    if cfg.experiment == "all" {
        return all(cfg, started);
    }
    if let Some(e) = experiments::find(&cfg.experiment) {
        return single(cfg, e.run(cfg)?, started);
    }
    if let Some(c) = verify::find_criterion(&cfg.experiment) {
        reject_overrides(cfg)?;
        return single(cfg, verify::criterion(c.id, &cfg.verify_config())?, started);
    }
    bail!("unknown experiment `{}` (see `roughsq list`)", cfg.experiment)
}

fn reject_overrides(cfg: &RunConfig) -> Result<()> {
    if cfg.alpha.is_some() || cfg.p.is_some() || cfg.function.is_some() {
        bail!("criteria run with fixed parameters; --alpha, --p and --function are not accepted");
    }
    Ok(())
}

/// Every criterion in order, one subdirectory each, plus `summary.csv`
/// and `summary.txt` with one row per criterion.
fn all(cfg: &RunConfig, started: u64) -> Result<Outcome> {
    reject_overrides(cfg)?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let vc = cfg.verify_config();
    let mut table = Table::new("summary", &["criterion", "passed", "verdicts", "failed"]);
    let mut text = format!("{:<4} {:<22} {:<6} {}\n", "#", "criterion", "status", "failing verdicts");
    let mut failures = Vec::new();
    let mut wall = Vec::new();
    for c in verify::CRITERIA.iter() {
        let clock = Instant::now();
        let report = verify::criterion(c.id, &vc)?;
        wall.push((c.id, clock.elapsed().as_secs_f64()));
        let dir = cfg.out.join(format!("c{:02}-{}", c.number, c.id));
        write_report(&dir, cfg, &report, started)?;
        let failed: Vec<String> = report.failures().map(|v| v.name.clone()).collect();
        let status = if failed.is_empty() { "PASS" } else { "FAIL" };
        text.push_str(&format!("c{:<3} {:<22} {:<6} {}\n", c.number, c.id, status, failed.join(", ")));
        table.push(vec![c.number as f64, failed.is_empty() as u8 as f64, report.verdicts.len() as f64, failed.len() as f64]);
        failures.extend(failed.into_iter().map(|f| format!("c{} {}: {f}", c.number, c.id)));
    }
    write_table(&cfg.out, &table)?;
    fs::write(cfg.out.join("summary.txt"), &text)?;
    let timing: std::collections::BTreeMap<_, _> = wall.into_iter().collect();
    let meta = serde_json::json!({
        "experiment": "all",
        "tier": cfg.tier.to_string(),
        "seed": cfg.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "started_unix_seconds": started,
        "wall_clock_seconds": timing,
    });
    fs::write(cfg.out.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(Outcome { passed: failures.is_empty(), failures, summary: text })
}
