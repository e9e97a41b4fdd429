//! Report files for an ensemble run.
//!
//! A report directory holds `config.txt`, `replicates.csv`,
//! `failures.csv`, `constants.csv`, `aggregate.csv`, `fits.csv` and
//! `SUMMARY.txt`. Everything but the summary is a deterministic function of
//! the config; the aggregate can be rebuilt from the first four files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::ensemble::{Aggregate, EnsembleResult, ReplicateRecord};
use super::experiments;

pub const CONFIG_FILE: &str = "config.txt";
pub const REPLICATES_FILE: &str = "replicates.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const CONSTANTS_FILE: &str = "constants.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const FITS_FILE: &str = "fits.csv";
pub const SUMMARY_FILE: &str = "SUMMARY.txt";

fn replicates_csv(columns: &[String], records: &[ReplicateRecord]) -> String {
    let mut s = String::from("replicate,seed");
    for c in columns {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for r in records {
        s.push_str(&format!("{},{}", r.replicate, r.seed));
        for v in &r.values {
            s.push(',');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

fn summary(result: &EnsembleResult) -> String {
    let c = &result.config;
    let mut s = format!(
        "experiment: {}\ndomain: {} n={}\ngamma: {}\neps: {}\nreplicates: {} succeeded, {} failed\nruntime_seconds: {:.3}\n",
        c.experiment,
        c.domain,
        c.n,
        c.gamma,
        c.eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
        result.records.len(),
        result.failures.len(),
        result.runtime.as_secs_f64()
    );
    for f in &result.aggregate.fits {
        s.push_str(&format!("fit {}: slope={} se={} r2={}\n", f.name, f.slope, f.se, f.r2));
    }
    for check in &result.aggregate.checks {
        s.push_str(&check.to_string());
        s.push('\n');
    }
    s.push_str(if result.passed() { "overall: PASS\n" } else { "overall: FAIL\n" });
    s
}

/// Writes the report files into `dir`, creating it if needed.
pub fn export_report(result: &EnsembleResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let agg = &result.aggregate;
    let mut fits = String::from("name,slope,intercept,r2,se\n");
    for f in &agg.fits {
        fits.push_str(&format!("{},{},{},{},{}\n", f.name, f.slope, f.intercept, f.r2, f.se));
    }
    let mut failures = String::from("replicate,seed,error\n");
    for f in &result.failures {
        failures.push_str(&format!("{},{},\"{}\"\n", f.replicate, f.seed, f.error.replace('"', "'")));
    }
    let mut constants = String::from("name,value\n");
    for (k, v) in &result.constants {
        constants.push_str(&format!("{k},{v}\n"));
    }
    let files = [
        (CONFIG_FILE, result.config.to_text()),
        (REPLICATES_FILE, replicates_csv(&result.columns, &result.records)),
        (FAILURES_FILE, failures),
        (CONSTANTS_FILE, constants),
        (AGGREGATE_FILE, agg.table.to_csv()),
        (FITS_FILE, fits),
        (SUMMARY_FILE, summary(result)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body)?;
        written.push(p);
    }
    Ok(written)
}

/// Parses a `replicates.csv` body into column names and records.
pub fn parse_replicates_csv(text: &str) -> Result<(Vec<String>, Vec<ReplicateRecord>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty replicates file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "replicate" || cols[1] != "seed" {
        return Err(Error::Format("replicates file must start with replicate,seed".into()));
    }
    let columns: Vec<String> = cols[2..].iter().map(|s| s.to_string()).collect();
    let bad = |k: usize| Error::Format(format!("malformed replicates row {}", k + 2));
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() + 2 {
            return Err(bad(k));
        }
        let replicate = fields[0].parse().map_err(|_| bad(k))?;
        let seed = fields[1].parse().map_err(|_| bad(k))?;
        let values = fields[2..].iter().map(|v| v.parse::<f64>().map_err(|_| bad(k))).collect::<Result<_>>()?;
        records.push(ReplicateRecord { replicate, seed, values });
    }
    Ok((columns, records))
}

fn parse_constants_csv(text: &str) -> Result<Vec<(String, f64)>> {
    text.lines()
        .skip(1)
        .map(|line| {
            let (k, v) = line.split_once(',').ok_or_else(|| Error::Format(format!("bad constants row '{line}'")))?;
            let v = v.parse().map_err(|_| Error::Format(format!("bad constant value '{v}'")))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

/// Rebuilds the aggregate of a report directory from its config,
/// constants and per-replicate records.
pub fn reaggregate_report(dir: &Path) -> Result<Aggregate> {
    let config = ExperimentConfig::parse(&fs::read_to_string(dir.join(CONFIG_FILE))?, None)?;
    let constants = parse_constants_csv(&fs::read_to_string(dir.join(CONSTANTS_FILE))?)?;
    let (columns, records) = parse_replicates_csv(&fs::read_to_string(dir.join(REPLICATES_FILE))?)?;
    if columns != experiments::columns(&config) {
        return Err(Error::Format("replicate columns do not match the config".into()));
    }
    experiments::aggregate(&config, &constants, &records)
}
