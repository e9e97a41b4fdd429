use crate::error::{Error, Result};
use crate::gmc_measure::CellMeasure;
use crate::grid_field::{circle_average, FieldGrid, Point};
use crate::stats_harness::stats::{jackknife_covariance, jackknife_variance};

use super::estimator::estimate_field;
use super::kernel::Kernel;

/// `f_ε(z) = h^ε(z) - h_ε(z)` at a set of probes for one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub eps: f64,
    pub gamma: f64,
    pub replicate: Option<u64>,
    pub probes: Vec<Point>,
    pub f_eps: Vec<f64>,
}

/// Residual between the measure-based estimate and the field's own circle
/// average, at the kernel's scale.
pub fn residual_field(
    field: &FieldGrid,
    measure: &CellMeasure,
    kernel: &Kernel,
    gamma: f64,
    probes: &[Point],
) -> Result<ResidualField> {
    if measure.eps() != kernel.eps() || measure.gamma() != gamma {
        return Err(Error::Config("measure, kernel and gamma disagree".into()));
    }
    if measure.domain() != field.domain() {
        return Err(Error::Config("measure and field live on different domains".into()));
    }
    let est = estimate_field(measure, kernel, gamma, probes)?;
    let f_eps = probes
        .iter()
        .zip(&est.values)
        .map(|(p, e)| Ok(e - circle_average(field, *p, kernel.eps())?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ResidualField { eps: kernel.eps(), gamma, replicate: field.seed(), probes: probes.to_vec(), f_eps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeStatistic {
    pub probe: Point,
    pub var: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairStatistic {
    pub first: Point,
    pub second: Point,
    pub sep: f64,
    pub cov: f64,
    pub se: f64,
}

/// Sample variances per probe and covariances per probe pair, with
/// jackknife standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualStatistics {
    pub probes: Vec<ProbeStatistic>,
    pub pairs: Vec<PairStatistic>,
}

/// Statistics of residuals already evaluated: `values[r][p]` is replicate
/// `r` at probe `p`; `pairs` index into `probes`. Reduction runs in
/// replicate order.
pub fn residual_statistics_from_values(
    values: &[Vec<f64>],
    probes: &[Point],
    pairs: &[(usize, usize)],
) -> Result<ResidualStatistics> {
    if values.len() < 3 {
        return Err(Error::Precondition("residual statistics need at least three replicates".into()));
    }
    if values.iter().any(|r| r.len() != probes.len()) {
        return Err(Error::Shape("replicate residuals do not match the probe list".into()));
    }
    let column = |k: usize| values.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let probe_stats = (0..probes.len())
        .map(|k| {
            let e = jackknife_variance(&column(k));
            ProbeStatistic { probe: probes[k], var: e.value, se: e.se }
        })
        .collect();
    let pair_stats = pairs
        .iter()
        .map(|&(a, b)| {
            if a >= probes.len() || b >= probes.len() {
                return Err(Error::Shape(format!("pair ({a}, {b}) is out of range")));
            }
            let e = jackknife_covariance(&column(a), &column(b));
            Ok(PairStatistic {
                first: probes[a],
                second: probes[b],
                sep: probes[a].dist(probes[b]),
                cov: e.value,
                se: e.se,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualStatistics { probes: probe_stats, pairs: pair_stats })
}

/// Residual statistics over replicates that share domain, `γ` and `ε`.
pub fn residual_statistics(
    replicates: &[(FieldGrid, CellMeasure)],
    kernel: &Kernel,
    gamma: f64,
    probes: &[Point],
    pairs: &[(usize, usize)],
) -> Result<ResidualStatistics> {
    let Some((f0, m0)) = replicates.first() else {
        return Err(Error::Precondition("no replicates".into()));
    };
    for (f, m) in replicates {
        if f.domain() != f0.domain() || m.eps() != m0.eps() || m.gamma() != m0.gamma() || m.gamma() != gamma {
            return Err(Error::Config("replicates disagree on domain, gamma or eps".into()));
        }
    }
    let values = replicates
        .iter()
        .map(|(f, m)| residual_field(f, m, kernel, gamma, probes).map(|r| r.f_eps))
        .collect::<Result<Vec<_>>>()?;
    residual_statistics_from_values(&values, probes, pairs)
}
