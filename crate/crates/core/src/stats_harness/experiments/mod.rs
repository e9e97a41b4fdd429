//! The ensemble experiments: set-up, per-replicate observables and
//! aggregation.

mod exponent;
mod field;
mod lbm;
mod pairing;
mod residual;

use crate::error::{Error, Result};
use crate::grid_field::{DomainSpec, Point, Shape};

use super::config::{ExperimentConfig, ExperimentKind};
use super::ensemble::{Aggregate, Experiment, ReplicateRecord};
use super::stats::{jackknife_se, leave_one_out};

/// Fewer successful replicates than this give a header-only aggregate.
const MIN_RECORDS: usize = 3;

pub(crate) fn prepare(config: &ExperimentConfig) -> Result<Box<dyn Experiment>> {
    Ok(match config.experiment {
        ExperimentKind::CircleVariance => Box::new(field::CircleVariance::new(config)?),
        ExperimentKind::MeasureExpectation => Box::new(field::MeasureExpectation::new(config)?),
        ExperimentKind::Variance | ExperimentKind::Covariance => Box::new(residual::Residuals::new(config)?),
        ExperimentKind::Reconstruction => Box::new(pairing::Reconstruction::new(config)?),
        ExperimentKind::Boundary => Box::new(pairing::BoundaryReconstruction::new(config)?),
        ExperimentKind::LbmRun => Box::new(lbm::LbmRun::new(config)?),
        ExperimentKind::LbmExtension => Box::new(lbm::LbmExtension::new(config)?),
        ExperimentKind::Exponent => Box::new(exponent::Exponent::new(config)?),
    })
}

/// Per-replicate column names, a function of the config alone.
pub fn columns(config: &ExperimentConfig) -> Vec<String> {
    match config.experiment {
        ExperimentKind::CircleVariance => eps_columns(config, &["h"]),
        ExperimentKind::MeasureExpectation => eps_columns(config, &["mass"]),
        ExperimentKind::Variance | ExperimentKind::Covariance => residual::columns(config),
        ExperimentKind::Reconstruction | ExperimentKind::Boundary => {
            let mut c = eps_columns(config, &["pair"]);
            c.push("pair_true".into());
            c
        }
        ExperimentKind::LbmRun => lbm::RUN_COLUMNS.iter().map(|s| s.to_string()).collect(),
        ExperimentKind::LbmExtension => eps_columns(config, &["est", "true", "excluded"]),
        ExperimentKind::Exponent => exponent::columns(config),
    }
}

/// Aggregates records. Pure: the same inputs give the same output.
pub fn aggregate(config: &ExperimentConfig, constants: &[(String, f64)], records: &[ReplicateRecord]) -> Result<Aggregate> {
    let width = columns(config).len();
    if let Some(r) = records.iter().find(|r| r.values.len() != width) {
        return Err(Error::Shape(format!(
            "replicate {} has {} values, expected {width}",
            r.replicate,
            r.values.len()
        )));
    }
    let data = Columns { names: columns(config), records };
    match config.experiment {
        ExperimentKind::CircleVariance => field::aggregate_circle_variance(config, constants, &data),
        ExperimentKind::MeasureExpectation => field::aggregate_measure_expectation(config, constants, &data),
        ExperimentKind::Variance => residual::aggregate_variance(config, &data),
        ExperimentKind::Covariance => residual::aggregate_covariance(config, &data),
        ExperimentKind::Reconstruction => pairing::aggregate_pairing(config, &data, pairing::Target::Interior),
        ExperimentKind::Boundary => pairing::aggregate_pairing(config, &data, pairing::Target::Boundary),
        ExperimentKind::LbmRun => lbm::aggregate_run(config, &data),
        ExperimentKind::LbmExtension => lbm::aggregate_extension(config, &data),
        ExperimentKind::Exponent => exponent::aggregate(config, &data),
    }
}

fn eps_columns(config: &ExperimentConfig, prefixes: &[&str]) -> Vec<String> {
    prefixes
        .iter()
        .flat_map(|p| (0..config.eps.len()).map(move |k| format!("{p}_e{k}")))
        .collect()
}

/// Record values addressed by column name.
struct Columns<'a> {
    names: Vec<String>,
    records: &'a [ReplicateRecord],
}

impl Columns<'_> {
    fn len(&self) -> usize {
        self.records.len()
    }

    fn enough(&self) -> bool {
        self.records.len() >= MIN_RECORDS
    }

    fn get(&self, name: &str) -> Vec<f64> {
        let k = self.names.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
        self.records.iter().map(|r| r.values[k]).collect()
    }
}

/// Jackknife standard error of a statistic of index subsets.
fn jackknife(n: usize, stat: impl Fn(&[usize]) -> f64) -> f64 {
    jackknife_se(&leave_one_out(n, stat))
}

fn pick(xs: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| xs[i]).collect()
}

fn constant(constants: &[(String, f64)], name: &str) -> Result<f64> {
    constants
        .iter()
        .find(|(k, _)| k == name)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Input(format!("missing constant {name}")))
}

fn domain_of(config: &ExperimentConfig) -> Result<DomainSpec> {
    DomainSpec::with_default_boundary(config.domain, config.n)
}

/// The natural centre of a Dirichlet domain and its distance to the
/// boundary.
fn center_of(shape: Shape) -> (Point, f64) {
    match shape {
        Shape::UnitSquare => (Point::new(0.5, 0.5), 0.5),
        _ => (Point::ORIGIN, 1.0),
    }
}

fn require_positive_gamma(config: &ExperimentConfig) -> Result<()> {
    if config.gamma <= 0.0 {
        return Err(Error::Config(format!("experiment {} needs gamma > 0", config.experiment)));
    }
    Ok(())
}
