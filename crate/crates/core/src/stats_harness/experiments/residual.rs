use crate::error::{Error, Result};
use crate::gmc_measure::{build_liouville_measure_in, CellRegion};
use crate::grid_field::{circle_average, DomainSpec, FieldGrid, Point};
use crate::reconstruct::{estimate_field, make_kernel, Kernel, KernelDim};
use crate::stats_harness::config::ExperimentConfig;
use crate::stats_harness::ensemble::{Aggregate, Check, Experiment, Relation, Table};
use crate::stats_harness::stats::{jackknife_covariance, jackknife_variance, sample_covariance, sample_variance};

use super::{center_of, domain_of, jackknife, pick, require_positive_gamma, Columns};

/// Probe offsets along the horizontal diameter through the centre. Probe 0
/// is the centre; probes `2s+1, 2s+2` form the pair at `SEPARATIONS[s]`.
const OFFSETS: [f64; 7] = [0.0, -1.0 / 32.0, 1.0 / 32.0, -1.0 / 16.0, 1.0 / 16.0, -1.0 / 8.0, 1.0 / 8.0];
const SEPARATIONS: [f64; 3] = [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0];

fn probes(config: &ExperimentConfig) -> Vec<Point> {
    let (c, _) = center_of(config.domain);
    OFFSETS.iter().map(|dx| Point::new(c.x + dx, c.y)).collect()
}

pub(super) fn columns(config: &ExperimentConfig) -> Vec<String> {
    (0..config.eps.len())
        .flat_map(|k| (0..OFFSETS.len()).map(move |q| format!("f_e{k}_p{q}")))
        .collect()
}

/// Residuals `f_ε = h^ε - h_ε` at the probes, for every scale.
pub(super) struct Residuals {
    domain: DomainSpec,
    gamma: f64,
    eps: Vec<f64>,
    kernels: Vec<Kernel>,
    probes: Vec<Point>,
}

impl Residuals {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        require_positive_gamma(config)?;
        let domain = domain_of(config)?;
        let lattice = domain.lattice();
        let probes = probes(config);
        let margin = 4.0 * config.eps[0];
        if let Some(p) = probes.iter().find(|p| lattice.boundary_distance(**p) < margin) {
            return Err(Error::Config(format!(
                "probe ({}, {}) is closer than 4 eps_max = {margin} to the boundary",
                p.x, p.y
            )));
        }
        let kernels =
            config.eps.iter().map(|&e| make_kernel(e, KernelDim::Two, config.n)).collect::<Result<_>>()?;
        Ok(Residuals { domain, gamma: config.gamma, eps: config.eps.clone(), kernels, probes })
    }
}

impl Experiment for Residuals {
    fn field_domain(&self) -> Option<DomainSpec> {
        Some(self.domain)
    }

    fn constants(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn observe(&self, field: Option<&FieldGrid>, _seed: u64) -> Result<Vec<f64>> {
        let f = field.expect("residuals need a field");
        let l = f.lattice();
        let (x_lo, x_hi) = self.probes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
        let y = self.probes[0].y;
        let mut out = Vec::with_capacity(self.eps.len() * self.probes.len());
        for (e, kernel) in self.eps.iter().zip(&self.kernels) {
            let pad = e + 2.0 * l.h;
            let region = CellRegion::covering_box(l, Point::new(x_lo - pad, y - pad), Point::new(x_hi + pad, y + pad));
            let measure = build_liouville_measure_in(f, self.gamma, *e, region)?;
            let est = estimate_field(&measure, kernel, self.gamma, &self.probes)?;
            if est.degenerate > 0 {
                return Err(Error::Input(format!("{} probes saw no mass at eps={e}", est.degenerate)));
            }
            for (p, v) in self.probes.iter().zip(&est.values) {
                out.push(v - circle_average(f, *p, *e)?);
            }
        }
        Ok(out)
    }
}

pub(super) fn aggregate_variance(config: &ExperimentConfig, data: &Columns) -> Result<Aggregate> {
    let mut out = Aggregate {
        table: Table::new(&["probe_x", "probe_y", "eps", "gamma", "var_f", "se_var"]),
        ..Default::default()
    };
    if !data.enough() {
        return Ok(out);
    }
    let probes = probes(config);
    for (q, p) in probes.iter().enumerate() {
        for (k, &e) in config.eps.iter().enumerate() {
            let v = jackknife_variance(&data.get(&format!("f_e{k}_p{q}")));
            out.table.push_numbers(&[p.x, p.y, e, config.gamma, v.value, v.se]);
        }
    }
    let last = config.eps.len() - 1;
    if last == 0 {
        return Ok(out);
    }
    // Var[f_ε]/log(ε₀/ε) at the finest scale over the same at the coarsest,
    // with ε₀ = 4 ε_max.
    let eps0 = 4.0 * config.eps[0];
    let (w0, w1) = ((eps0 / config.eps[0]).ln(), (eps0 / config.eps[last]).ln());
    let a = data.get("f_e0_p0");
    let b = data.get(&format!("f_e{last}_p0"));
    let ratio = |a: &[f64], b: &[f64]| (sample_variance(b) / w1) / (sample_variance(a) / w0);
    let value = ratio(&a, &b);
    let se = jackknife(data.len(), |idx| ratio(&pick(&a, idx), &pick(&b, idx)));
    out.checks.push(
        Check::new(
            "residual_variance_log_ratio",
            format!(
                "Var[f_eps]/log(eps0/eps) at eps={} is at most 3x its value at eps={}",
                config.eps[last], config.eps[0]
            ),
            value,
            Relation::AtMost,
            3.0,
        )
        .with_slack(se, 2.0),
    );
    Ok(out)
}

pub(super) fn aggregate_covariance(config: &ExperimentConfig, data: &Columns) -> Result<Aggregate> {
    let mut out = Aggregate {
        table: Table::new(&["x1", "x2", "sep", "eps", "gamma", "cov_f", "se_cov"]),
        ..Default::default()
    };
    if !data.enough() {
        return Ok(out);
    }
    let probes = probes(config);
    for (s, &sep) in SEPARATIONS.iter().enumerate() {
        let (q1, q2) = (2 * s + 1, 2 * s + 2);
        for (k, &e) in config.eps.iter().enumerate() {
            let c = jackknife_covariance(&data.get(&format!("f_e{k}_p{q1}")), &data.get(&format!("f_e{k}_p{q2}")));
            out.table.push_numbers(&[probes[q1].x, probes[q2].x, sep, e, config.gamma, c.value, c.se]);
        }
    }
    let last = config.eps.len() - 1;
    if last == 0 {
        return Ok(out);
    }
    let s = SEPARATIONS.len() - 1;
    let (q1, q2) = (2 * s + 1, 2 * s + 2);
    let cols = |k: usize| (data.get(&format!("f_e{k}_p{q1}")), data.get(&format!("f_e{k}_p{q2}")));
    let (a1, a2) = cols(0);
    let (b1, b2) = cols(last);
    // Positive when the finest covariance exceeds half the coarsest.
    let excess = |idx: Option<&[usize]>| {
        let f = |x: &[f64]| idx.map_or_else(|| x.to_vec(), |i| pick(x, i));
        sample_covariance(&f(&b1), &f(&b2)).abs() - sample_covariance(&f(&a1), &f(&a2)).abs() / 2.0
    };
    let value = excess(None);
    let se = jackknife(data.len(), |idx| excess(Some(idx)));
    out.checks.push(
        Check::new(
            "residual_covariance_halving",
            format!(
                "|Cov f_eps| at separation {} drops by a factor >= 2 from eps={} to eps={}: |cov_fine| - |cov_coarse|/2",
                SEPARATIONS[s], config.eps[0], config.eps[last]
            ),
            value,
            Relation::AtMost,
            0.0,
        )
        .with_slack(se, 2.0),
    );
    Ok(out)
}
