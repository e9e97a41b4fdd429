//! Replicate orchestration and result types.

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exec::{map_indices, ExecutionMode};
use crate::grid_field::{DomainSpec, FieldGrid, GffSampler};

use super::config::ExperimentConfig;
use super::experiments;

/// Observables of one successful replicate, in the experiment's column
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub seed: u64,
    pub values: Vec<f64>,
}

/// A replicate that raised an error; rerunning with `seed` reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateFailure {
    pub replicate: usize,
    pub seed: u64,
    pub error: String,
}

/// A small CSV table; cells are already formatted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// A fitted slope with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedFit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `measured - sigmas·se <= threshold`.
    AtMost,
    /// `measured + sigmas·se > threshold`.
    Above,
}

/// A pass/fail acceptance check on an aggregate quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub claim: String,
    pub measured: f64,
    pub se: f64,
    pub sigmas: f64,
    pub relation: Relation,
    pub threshold: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, claim: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        Check { name: name.into(), claim: claim.into(), measured, se: 0.0, sigmas: 0.0, relation, threshold }
    }

    /// Allows `sigmas` standard errors of slack.
    pub fn with_slack(mut self, se: f64, sigmas: f64) -> Self {
        self.se = se;
        self.sigmas = sigmas;
        self
    }

    pub fn passed(&self) -> bool {
        let slack = self.sigmas * self.se;
        match self.relation {
            Relation::AtMost => self.measured - slack <= self.threshold,
            Relation::Above => self.measured + slack > self.threshold,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, sign) = match self.relation {
            Relation::AtMost => ("<=", '-'),
            Relation::Above => (">", '+'),
        };
        let slack = if self.sigmas > 0.0 { format!(" {sign} {}se", self.sigmas) } else { String::new() };
        write!(
            f,
            "{} {}: measured={} se={} threshold={} rule: measured{slack} {op} threshold ({})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.se,
            self.threshold,
            self.claim
        )
    }
}

/// Everything derived from the per-replicate records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Aggregate {
    pub table: Table,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<Check>,
}

/// Output of an ensemble run. `aggregate` is a pure function of `config`,
/// `constants` and `records`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub records: Vec<ReplicateRecord>,
    pub failures: Vec<ReplicateFailure>,
    /// Replicate-independent quantities computed once per run (oracles,
    /// the fixed path's viewpoint, ...).
    pub constants: Vec<(String, f64)>,
    pub aggregate: Aggregate,
    pub runtime: Duration,
}

impl EnsembleResult {
    /// True when every acceptance check passed.
    pub fn passed(&self) -> bool {
        self.aggregate.checks.iter().all(Check::passed)
    }

    /// Values of one column across records.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r.values[k]).collect())
    }
}

/// A prepared experiment: replicate-independent set-up is done.
pub(crate) trait Experiment: Sync {
    /// Domain of the GFF each replicate needs, if any.
    fn field_domain(&self) -> Option<DomainSpec>;
    fn constants(&self) -> Vec<(String, f64)>;
    fn observe(&self, field: Option<&FieldGrid>, seed: u64) -> Result<Vec<f64>>;
}

/// Seed of replicate `index`.
pub fn replicate_seed(config: &ExperimentConfig, index: usize) -> u64 {
    config.seed.wrapping_add(index as u64)
}

pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleResult> {
    run_ensemble_with(config, ExecutionMode::default())
}

pub fn run_ensemble_with(config: &ExperimentConfig, mode: ExecutionMode) -> Result<EnsembleResult> {
    Ok(run_suite(std::slice::from_ref(config), mode)?.pop().expect("one result per config"))
}

/// Runs several experiments replicate by replicate. Experiments asking for
/// the same field domain and seed share one sampled field, so a suite over
/// one domain samples each replicate once.
pub fn run_suite(configs: &[ExperimentConfig], mode: ExecutionMode) -> Result<Vec<EnsembleResult>> {
    let start = Instant::now();
    for c in configs {
        c.validate()?;
    }
    let prepared = configs.iter().map(experiments::prepare).collect::<Result<Vec<_>>>()?;
    let mut samplers: HashMap<DomainSpec, GffSampler> = HashMap::new();
    for e in &prepared {
        if let Some(d) = e.field_domain() {
            if !samplers.contains_key(&d) {
                samplers.insert(d, GffSampler::new(d)?);
            }
        }
    }
    let max_reps = configs.iter().map(|c| c.replicates).max().unwrap_or(0);

    let outcomes: Vec<Vec<Option<Result<Vec<f64>>>>> = map_indices(mode, max_reps, |i| {
        let mut fields: Vec<((DomainSpec, u64), Result<FieldGrid>)> = Vec::new();
        configs
            .iter()
            .zip(&prepared)
            .map(|(c, e)| {
                if i >= c.replicates {
                    return None;
                }
                let seed = replicate_seed(c, i);
                let Some(d) = e.field_domain() else {
                    return Some(e.observe(None, seed));
                };
                let k = match fields.iter().position(|(key, _)| *key == (d, seed)) {
                    Some(k) => k,
                    None => {
                        fields.push(((d, seed), samplers[&d].sample(seed)));
                        fields.len() - 1
                    }
                };
                Some(match &fields[k].1 {
                    Ok(f) => e.observe(Some(f), seed),
                    Err(err) => Err(Error::Input(format!("field sampling failed: {err}"))),
                })
            })
            .collect()
    });

    let runtime = start.elapsed();
    let mut results = Vec::with_capacity(configs.len());
    for (k, (c, e)) in configs.iter().zip(&prepared).enumerate() {
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for (i, row) in outcomes.iter().enumerate().take(c.replicates) {
            let seed = replicate_seed(c, i);
            match row[k].as_ref().expect("replicate within range") {
                Ok(values) => records.push(ReplicateRecord { replicate: i, seed, values: values.clone() }),
                Err(err) => {
                    log::warn!("{} replicate {i} (seed {seed}) failed: {err}", c.experiment);
                    failures.push(ReplicateFailure { replicate: i, seed, error: err.to_string() });
                }
            }
        }
        if records.len() * 5 < c.replicates * 4 {
            return Err(Error::Ensemble(format!(
                "{}: only {} of {} replicates succeeded; first failure: {}",
                c.experiment,
                records.len(),
                c.replicates,
                failures.first().map(|f| f.error.as_str()).unwrap_or("none")
            )));
        }
        let constants = e.constants();
        let aggregate = experiments::aggregate(c, &constants, &records)?;
        results.push(EnsembleResult {
            config: c.clone(),
            columns: experiments::columns(c),
            records,
            failures,
            constants,
            aggregate,
            runtime,
        });
    }
    Ok(results)
}
