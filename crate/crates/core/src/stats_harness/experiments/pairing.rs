use crate::error::{Error, Result};
use crate::gmc_measure::{build_boundary_measure, build_liouville_measure_in, CellRegion};
use crate::grid_field::{reflect_to_upper, semicircle_average, DomainSpec, FieldGrid, Lattice, Point};
use crate::reconstruct::{
    boundary_estimate, estimate_field_nodes, make_kernel, test_function_pairing, Kernel, KernelDim, NodeWindow,
    TestFunction,
};
use crate::stats_harness::config::ExperimentConfig;
use crate::stats_harness::ensemble::{Aggregate, Check, Experiment, Relation, Table};
use crate::stats_harness::stats::{jackknife_correlation, jackknife_se, loo_correlations, sample_variance};

use super::{domain_of, require_positive_gamma, Columns};

const DEFAULT_RHO_RADIUS: f64 = 0.45;

/// `(h^ε, ρ)` for each scale and `(h, ρ)`, with `ρ` a bump at the centre of
/// the disk.
pub(super) struct Reconstruction {
    domain: DomainSpec,
    gamma: f64,
    eps: Vec<f64>,
    kernels: Vec<Kernel>,
    rho: TestFunction,
    radius: f64,
    window: NodeWindow,
}

impl Reconstruction {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        require_positive_gamma(config)?;
        let domain = domain_of(config)?;
        let lattice = domain.lattice();
        let radius: f64 = config.extra_or("rho_radius", DEFAULT_RHO_RADIUS)?;
        if !(radius > 0.0) || radius * std::f64::consts::SQRT_2 + config.eps[0] >= 1.0 {
            return Err(Error::Config(format!("rho_radius {radius} leaves no room for eps {}", config.eps[0])));
        }
        let rho = TestFunction::bump(&lattice, Point::ORIGIN, radius)?;
        let lo = |o: f64| ((-radius - o) / lattice.h).ceil() as usize;
        let hi = |o: f64| ((radius - o) / lattice.h).floor() as usize;
        let (i0, j0) = (lo(lattice.x0), lo(lattice.y0));
        let window = NodeWindow { i0, j0, nx: hi(lattice.x0) + 1 - i0, ny: hi(lattice.y0) + 1 - j0 };
        let kernels =
            config.eps.iter().map(|&e| make_kernel(e, KernelDim::Two, config.n)).collect::<Result<_>>()?;
        Ok(Reconstruction { domain, gamma: config.gamma, eps: config.eps.clone(), kernels, rho, radius, window })
    }

    fn pair_window(&self, lattice: &Lattice, values: &[f64]) -> Result<f64> {
        let w = self.window;
        let rho = self.rho.values();
        let mut s = 0.0;
        for b in 0..w.ny {
            for a in 0..w.nx {
                let r = rho[lattice.idx(w.i0 + a, w.j0 + b)];
                if r != 0.0 {
                    let v = values[b * w.nx + a];
                    if !v.is_finite() {
                        return Err(Error::Input("estimator window without mass inside the test function".into()));
                    }
                    s += v * r;
                }
            }
        }
        Ok(s * self.rho.weight())
    }
}

impl Experiment for Reconstruction {
    fn field_domain(&self) -> Option<DomainSpec> {
        Some(self.domain)
    }

    fn constants(&self) -> Vec<(String, f64)> {
        vec![("rho_radius".into(), self.radius)]
    }

    fn observe(&self, field: Option<&FieldGrid>, _seed: u64) -> Result<Vec<f64>> {
        let f = field.expect("reconstruction needs a field");
        let l = f.lattice();
        let mut out = Vec::with_capacity(self.eps.len() + 1);
        for (e, kernel) in self.eps.iter().zip(&self.kernels) {
            let pad = self.radius + e + 2.0 * l.h;
            let region = CellRegion::covering_box(l, Point::new(-pad, -pad), Point::new(pad, pad));
            let measure = build_liouville_measure_in(f, self.gamma, *e, region)?;
            let est = estimate_field_nodes(&measure, kernel, self.gamma, self.window)?;
            out.push(self.pair_window(l, &est.values)?);
        }
        out.push(test_function_pairing(f.values(), &self.rho)?);
        Ok(out)
    }
}

/// Boundary analogue: `(h^ε, ρ)` on the free diameter of the reflected
/// field against the pairing of its semicircle averages at two lattice
/// spacings.
pub(super) struct BoundaryReconstruction {
    disk: DomainSpec,
    gamma: f64,
    eps: Vec<f64>,
    kernels: Vec<Kernel>,
    rho: TestFunction,
    support: Vec<usize>,
    probes: Vec<f64>,
    radius: f64,
}

impl BoundaryReconstruction {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        require_positive_gamma(config)?;
        let upper = domain_of(config)?;
        let disk = upper.reflection_parent().ok_or_else(|| Error::Config("boundary runs need the mixed upper disk".into()))?;
        let radius: f64 = config.extra_or("rho_radius", DEFAULT_RHO_RADIUS)?;
        if !(radius > 0.0) || radius + config.eps[0] >= 1.0 {
            return Err(Error::Config(format!("rho_radius {radius} leaves no room for eps {}", config.eps[0])));
        }
        let rho = TestFunction::bump_on_diameter(config.n, 0.0, radius)?;
        let support = rho.support();
        let h = 1.0 / config.n as f64;
        let probes = support.iter().map(|&i| -1.0 + i as f64 * h).collect();
        let kernels =
            config.eps.iter().map(|&e| make_kernel(e, KernelDim::One, config.n)).collect::<Result<_>>()?;
        Ok(BoundaryReconstruction { disk, gamma: config.gamma, eps: config.eps.clone(), kernels, rho, support, probes, radius })
    }

    fn pair(&self, values: &[f64]) -> Result<f64> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("boundary estimator without mass inside the test function".into()));
        }
        let rho = self.rho.values();
        Ok(self.support.iter().zip(values).map(|(&i, v)| v * rho[i]).sum::<f64>() * self.rho.weight())
    }
}

impl Experiment for BoundaryReconstruction {
    fn field_domain(&self) -> Option<DomainSpec> {
        Some(self.disk)
    }

    fn constants(&self) -> Vec<(String, f64)> {
        vec![("rho_radius".into(), self.radius)]
    }

    fn observe(&self, field: Option<&FieldGrid>, _seed: u64) -> Result<Vec<f64>> {
        let upper = reflect_to_upper(field.expect("boundary runs need a field"))?;
        let mut out = Vec::with_capacity(self.eps.len() + 1);
        for (e, kernel) in self.eps.iter().zip(&self.kernels) {
            let nu = build_boundary_measure(&upper, self.gamma, *e)?;
            let est = boundary_estimate(&nu, kernel, self.gamma, &self.probes)?;
            out.push(self.pair(&est.values)?);
        }
        let fine = 2.0 * upper.lattice().h;
        let truth = self.probes.iter().map(|&x| semicircle_average(&upper, x, fine)).collect::<Result<Vec<_>>>()?;
        out.push(self.pair(&truth)?);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Target {
    Interior,
    Boundary,
}

pub(super) fn aggregate_pairing(config: &ExperimentConfig, data: &Columns, target: Target) -> Result<Aggregate> {
    let mut out = Aggregate {
        table: Table::new(&["eps", "gamma", "corr", "se_corr", "var_pair"]),
        ..Default::default()
    };
    if !data.enough() {
        return Ok(out);
    }
    let truth = data.get("pair_true");
    let mut loo = Vec::new();
    let mut corr = Vec::new();
    for (k, &e) in config.eps.iter().enumerate() {
        let est = data.get(&format!("pair_e{k}"));
        let c = jackknife_correlation(&est, &truth);
        out.table.push_numbers(&[e, config.gamma, c.value, c.se, sample_variance(&est)]);
        loo.push(loo_correlations(&est, &truth));
        corr.push(c.value);
    }
    let last = config.eps.len() - 1;
    let (name, threshold, what) = match target {
        Target::Interior => ("reconstruction_corr", 0.9, "(h^eps, rho)"),
        Target::Boundary => ("boundary_corr", 0.8, "boundary (h^eps, rho)"),
    };
    out.checks.push(Check::new(
        name,
        format!("correlation of centred {what} with the true pairing at eps={}", config.eps[last]),
        corr[last],
        Relation::Above,
        threshold,
    ));
    if target == Target::Interior {
        for k in 0..last {
            let diff: Vec<f64> = loo[k + 1].iter().zip(&loo[k]).map(|(a, b)| a - b).collect();
            out.checks.push(
                Check::new(
                    format!("reconstruction_corr_increase_e{k}"),
                    format!("correlation increases from eps={} to eps={}", config.eps[k], config.eps[k + 1]),
                    corr[k + 1] - corr[k],
                    Relation::Above,
                    0.0,
                )
                .with_slack(jackknife_se(&diff), 2.0),
            );
        }
    }
    Ok(out)
}
