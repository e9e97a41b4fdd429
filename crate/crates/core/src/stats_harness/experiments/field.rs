use crate::error::{Error, Result};
use crate::exec::{map_slice, ExecutionMode};
use crate::gmc_measure::{build_liouville_measure_in, CellRegion};
use crate::grid_field::{circle_average, circle_variance, green_table, DomainSpec, FieldGrid, Point};
use crate::stats_harness::config::ExperimentConfig;
use crate::stats_harness::ensemble::{Aggregate, Check, Experiment, NamedFit, Relation, Table};
use crate::stats_harness::fit::linear_fit;
use crate::stats_harness::stats::{jackknife_variance, mean_estimate, sample_variance};

use super::{center_of, constant, domain_of, jackknife, pick, Columns};

/// `h_ε` at the domain centre for each scale, with the Green's-function
/// variance as an oracle.
pub(super) struct CircleVariance {
    domain: DomainSpec,
    center: Point,
    eps: Vec<f64>,
    oracle: Vec<f64>,
}

impl CircleVariance {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let domain = domain_of(config)?;
        let (center, _) = center_of(config.domain);
        let green = green_table(domain)?;
        let oracle = config.eps.iter().map(|&e| circle_variance(&green, center, e)).collect::<Result<_>>()?;
        Ok(CircleVariance { domain, center, eps: config.eps.clone(), oracle })
    }
}

impl Experiment for CircleVariance {
    fn field_domain(&self) -> Option<DomainSpec> {
        Some(self.domain)
    }

    fn constants(&self) -> Vec<(String, f64)> {
        self.oracle.iter().enumerate().map(|(k, v)| (format!("oracle_var_e{k}"), *v)).collect()
    }

    fn observe(&self, field: Option<&FieldGrid>, _seed: u64) -> Result<Vec<f64>> {
        let f = field.expect("circle variance needs a field");
        self.eps.iter().map(|&e| circle_average(f, self.center, e)).collect()
    }
}

pub(super) fn aggregate_circle_variance(
    config: &ExperimentConfig,
    constants: &[(String, f64)],
    data: &Columns,
) -> Result<Aggregate> {
    let mut table = Table::new(&["eps", "log_inv_eps", "var_h", "se_var", "oracle_var"]);
    let mut out = Aggregate::default();
    if !data.enough() {
        out.table = table;
        return Ok(out);
    }
    let xs: Vec<f64> = config.eps.iter().map(|e| -e.ln()).collect();
    let cols: Vec<Vec<f64>> = (0..config.eps.len()).map(|k| data.get(&format!("h_e{k}"))).collect();
    let mut oracle = Vec::new();
    for (k, &e) in config.eps.iter().enumerate() {
        let v = jackknife_variance(&cols[k]);
        let o = constant(constants, &format!("oracle_var_e{k}"))?;
        oracle.push(o);
        table.push_numbers(&[e, xs[k], v.value, v.se, o]);
    }
    out.table = table;
    if xs.len() < 2 {
        return Ok(out);
    }
    let vars: Vec<f64> = cols.iter().map(|c| sample_variance(c)).collect();
    let fit = linear_fit(&xs, &vars)?;
    let se = jackknife(data.len(), |idx| {
        let v: Vec<f64> = cols.iter().map(|c| sample_variance(&pick(c, idx))).collect();
        linear_fit(&xs, &v).map(|f| f.slope).unwrap_or(f64::NAN)
    });
    let ofit = linear_fit(&xs, &oracle)?;
    out.fits.push(NamedFit { name: "var_vs_log_inv_eps".into(), slope: fit.slope, intercept: fit.intercept, r2: fit.r2, se });
    out.fits.push(NamedFit {
        name: "oracle_var_vs_log_inv_eps".into(),
        slope: ofit.slope,
        intercept: ofit.intercept,
        r2: ofit.r2,
        se: 0.0,
    });
    out.checks.push(
        Check::new(
            "log_law_slope_deviation",
            "circle-average variance grows like log(1/eps): |slope - 1|",
            (fit.slope - 1.0).abs(),
            Relation::AtMost,
            0.05,
        )
        .with_slack(se, 0.0),
    );
    Ok(out)
}

/// Total Liouville mass of the cells within `radius` of the centre, with
/// the lognormal oracle `Σ e^{γ² Var h_ε(c)/2} ε^{γ²/2} |cell|`.
pub(super) struct MeasureExpectation {
    domain: DomainSpec,
    gamma: f64,
    eps: Vec<f64>,
    region: CellRegion,
    cells: Vec<(usize, usize)>,
    oracle: Vec<f64>,
}

impl MeasureExpectation {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let domain = domain_of(config)?;
        let lattice = domain.lattice();
        let (center, reach) = center_of(config.domain);
        let radius: f64 = config.extra_or("radius", 0.5)?;
        if !(radius > 0.0) || radius + config.eps[0] >= reach {
            return Err(Error::Config(format!(
                "radius {radius} plus eps {} must stay inside the domain",
                config.eps[0]
            )));
        }
        let region = CellRegion::covering_box(
            &lattice,
            Point::new(center.x - radius, center.y - radius),
            Point::new(center.x + radius, center.y + radius),
        );
        let mut cells = Vec::new();
        for cj in region.cj0..region.cj0 + region.ncy {
            for ci in region.ci0..region.ci0 + region.ncx {
                if lattice.cell_center(ci, cj).dist(center) <= radius {
                    cells.push((ci, cj));
                }
            }
        }
        let green = green_table(domain)?;
        let g2 = config.gamma * config.gamma;
        let mut oracle = Vec::new();
        for &e in &config.eps {
            let vars = map_slice(ExecutionMode::default(), &cells, |&(ci, cj)| {
                circle_variance(&green, lattice.cell_center(ci, cj), e)
            });
            let mut total = 0.0;
            for v in vars {
                total += (g2 * v? / 2.0).exp();
            }
            oracle.push(total * e.powf(g2 / 2.0) * lattice.cell_area());
        }
        Ok(MeasureExpectation { domain, gamma: config.gamma, eps: config.eps.clone(), region, cells, oracle })
    }
}

impl Experiment for MeasureExpectation {
    fn field_domain(&self) -> Option<DomainSpec> {
        Some(self.domain)
    }

    fn constants(&self) -> Vec<(String, f64)> {
        let mut c: Vec<(String, f64)> =
            self.oracle.iter().enumerate().map(|(k, v)| (format!("oracle_mass_e{k}"), *v)).collect();
        c.push(("cells".into(), self.cells.len() as f64));
        c
    }

    fn observe(&self, field: Option<&FieldGrid>, _seed: u64) -> Result<Vec<f64>> {
        let f = field.expect("measure expectation needs a field");
        self.eps
            .iter()
            .map(|&e| {
                let m = build_liouville_measure_in(f, self.gamma, e, self.region)?;
                Ok(self.cells.iter().map(|&(ci, cj)| m.mass(ci, cj)).sum())
            })
            .collect()
    }
}

pub(super) fn aggregate_measure_expectation(
    config: &ExperimentConfig,
    constants: &[(String, f64)],
    data: &Columns,
) -> Result<Aggregate> {
    let mut out = Aggregate {
        table: Table::new(&["eps", "gamma", "mean_mass", "se_mass", "oracle_mass", "ratio", "se_ratio"]),
        ..Default::default()
    };
    if !data.enough() {
        return Ok(out);
    }
    for (k, &e) in config.eps.iter().enumerate() {
        let m = mean_estimate(&data.get(&format!("mass_e{k}")));
        let o = constant(constants, &format!("oracle_mass_e{k}"))?;
        let (ratio, se) = (m.value / o, m.se / o);
        out.table.push_numbers(&[e, config.gamma, m.value, m.se, o, ratio, se]);
        out.checks.push(
            Check::new(
                format!("mass_ratio_deviation_e{k}"),
                format!("mean cell mass matches the lognormal oracle at eps={e}: |ratio - 1|"),
                (ratio - 1.0).abs(),
                Relation::AtMost,
                0.05,
            )
            .with_slack(se, 0.0),
        );
    }
    Ok(out)
}
