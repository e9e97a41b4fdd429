use crate::error::{Error, Result};
use crate::grid_field::{DomainSpec, FieldGrid};
use crate::lbm::{
    choose_viewpoint, default_dt, harmonic_extension_true, harmonic_measure, lbm_trajectory, quantum_clock,
    sample_brownian_path, BrownianPath, ExtensionWindows, HarmonicMeasureSample,
};
use crate::stats_harness::config::ExperimentConfig;
use crate::stats_harness::ensemble::{Aggregate, Check, Experiment, Relation, Table};
use crate::stats_harness::stats::{jackknife_correlation, jackknife_variance, mean, mean_estimate, sample_variance};

use super::{domain_of, jackknife, pick, require_positive_gamma, Columns};

pub(super) const RUN_COLUMNS: [&str; 4] = ["exit_time", "phi_total", "max_abs_phi_minus_t", "qv_ratio"];

/// One path and one field per replicate: exit time, clock total, and the
/// quadratic variation of `Z` on a quantum-time grid against `φ⁻¹`.
pub(super) struct LbmRun {
    domain: DomainSpec,
    gamma: f64,
    eps: f64,
    qv_points: usize,
}

impl LbmRun {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let qv_points: usize = config.extra_or("qv_points", 256)?;
        if qv_points < 2 {
            return Err(Error::Config("qv_points must be at least 2".into()));
        }
        Ok(LbmRun { domain: domain_of(config)?, gamma: config.gamma, eps: config.eps[0], qv_points })
    }
}

impl Experiment for LbmRun {
    fn field_domain(&self) -> Option<DomainSpec> {
        (self.gamma != 0.0).then_some(self.domain)
    }

    fn constants(&self) -> Vec<(String, f64)> {
        vec![("dt".into(), default_dt(self.domain.resolution()))]
    }

    fn observe(&self, field: Option<&FieldGrid>, seed: u64) -> Result<Vec<f64>> {
        let zeros;
        let field = match field {
            Some(f) => f,
            None => {
                zeros = FieldGrid::zeros(self.domain);
                &zeros
            }
        };
        let path = sample_brownian_path(&self.domain, default_dt(self.domain.resolution()), seed)?;
        let clock = quantum_clock(&path, field, self.gamma, self.eps)?;
        let z = lbm_trajectory(&path, &clock)?;
        let total = clock.total();
        let max_err = clock.phi().iter().zip(path.times()).map(|(p, t)| (p - t).abs()).fold(0.0, f64::max);
        let grid: Vec<f64> = (0..=self.qv_points).map(|k| total * k as f64 / self.qv_points as f64).collect();
        let qv = z.quadratic_variation(&grid) / z.inverse_clock(total);
        Ok(vec![path.exit_time(), total, max_err, qv])
    }
}

pub(super) fn aggregate_run(config: &ExperimentConfig, data: &Columns) -> Result<Aggregate> {
    let mut out = Aggregate { table: Table::new(&["quantity", "mean", "se"]), ..Default::default() };
    if !data.enough() {
        return Ok(out);
    }
    for name in RUN_COLUMNS {
        let m = mean_estimate(&data.get(name));
        out.table.rows.push(vec![name.to_string(), m.value.to_string(), m.se.to_string()]);
    }
    let qv = mean_estimate(&data.get("qv_ratio"));
    out.checks.push(Check::new(
        "quadratic_variation",
        "quadratic variation of Z on a quantum-time grid recovers the inverse clock: |mean ratio - 1|",
        (qv.value - 1.0).abs(),
        Relation::AtMost,
        0.1,
    ).with_slack(qv.se, 0.0));
    if config.gamma == 0.0 {
        let worst = data.get("max_abs_phi_minus_t").into_iter().fold(0.0, f64::max);
        out.checks.push(Check::new(
            "identity_clock",
            "at gamma = 0 the clock equals Euclidean time: max |phi(t) - t|",
            worst,
            Relation::AtMost,
            0.0,
        ));
    }
    Ok(out)
}

/// One fixed path and harmonic measure, many fields: the clock-based
/// harmonic extension estimate against the circle-average one.
pub(super) struct LbmExtension {
    domain: DomainSpec,
    gamma: f64,
    eps: Vec<f64>,
    path: BrownianPath,
    omega: HarmonicMeasureSample,
    windows: Vec<ExtensionWindows>,
}

impl LbmExtension {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        require_positive_gamma(config)?;
        target_index(config)?;
        let domain = domain_of(config)?;
        let n = config.n;
        let walkers: usize = config.extra_or("walkers", 10_000)?;
        let path_seed: u64 = config.extra_or("path_seed", config.seed)?;
        let min_distance: f64 = config.extra_or("min_distance", 0.25)?;
        let path = sample_brownian_path(&domain, default_dt(n), path_seed)?;
        let z = choose_viewpoint(&path, min_distance)?;
        let omega = harmonic_measure(&path, &domain, z, walkers, 2.0 / n as f64, path_seed)?;
        let windows = config.eps.iter().map(|&e| ExtensionWindows::new(&omega, &path, e)).collect::<Result<_>>()?;
        Ok(LbmExtension { domain, gamma: config.gamma, eps: config.eps.clone(), path, omega, windows })
    }
}

impl Experiment for LbmExtension {
    fn field_domain(&self) -> Option<DomainSpec> {
        Some(self.domain)
    }

    fn constants(&self) -> Vec<(String, f64)> {
        vec![
            ("viewpoint_x".into(), self.omega.z.x),
            ("viewpoint_y".into(), self.omega.z.y),
            ("path_steps".into(), self.path.steps().len() as f64),
            ("exit_time".into(), self.path.exit_time()),
            ("range_mass".into(), self.omega.range_mass()),
        ]
    }

    fn observe(&self, field: Option<&FieldGrid>, _seed: u64) -> Result<Vec<f64>> {
        let f = field.expect("extension runs need a field");
        let k = self.eps.len();
        let mut out = vec![0.0; 3 * k];
        for (j, (&e, w)) in self.eps.iter().zip(&self.windows).enumerate() {
            let clock = quantum_clock(&self.path, f, self.gamma, e)?;
            let est = w.estimate(&clock, self.gamma)?;
            out[j] = est.value;
            out[k + j] = harmonic_extension_true(f, &self.omega, e)?;
            out[2 * k + j] = est.excluded as f64;
        }
        Ok(out)
    }
}

/// Index of the scale the correlation check uses: `target_eps` if given,
/// else `1/32` when listed, else the finest.
fn target_index(config: &ExperimentConfig) -> Result<usize> {
    match config.extra("target_eps") {
        Some(v) => {
            let t = crate::stats_harness::config::parse_scale(v)?;
            config
                .eps
                .iter()
                .position(|&e| e == t)
                .ok_or_else(|| Error::Config(format!("target_eps {v} is not in the eps list")))
        }
        None => Ok(config.eps.iter().position(|&e| e == 1.0 / 32.0).unwrap_or(config.eps.len() - 1)),
    }
}

pub(super) fn aggregate_extension(config: &ExperimentConfig, data: &Columns) -> Result<Aggregate> {
    let mut out = Aggregate {
        table: Table::new(&["eps", "gamma", "corr", "se_corr", "var_g", "se_var_g", "mean_excluded"]),
        ..Default::default()
    };
    if !data.enough() {
        return Ok(out);
    }
    let mut g = Vec::new();
    let mut corr = Vec::new();
    for (k, &e) in config.eps.iter().enumerate() {
        let est = data.get(&format!("est_e{k}"));
        let truth = data.get(&format!("true_e{k}"));
        let c = jackknife_correlation(&est, &truth);
        let gk: Vec<f64> = est.iter().zip(&truth).map(|(a, b)| a - b).collect();
        let v = jackknife_variance(&gk);
        out.table.push_numbers(&[e, config.gamma, c.value, c.se, v.value, v.se, mean(&data.get(&format!("excluded_e{k}")))]);
        g.push(gk);
        corr.push(c);
    }
    let t = target_index(config)?;
    out.checks.push(
        Check::new(
            "extension_corr",
            format!("correlation of centred clock-based and circle-average harmonic extensions at eps={}", config.eps[t]),
            corr[t].value,
            Relation::Above,
            0.5,
        )
        .with_slack(corr[t].se, 0.0),
    );
    let last = config.eps.len() - 1;
    if last > 0 {
        let (a, b) = (&g[0], &g[last]);
        let ratio = |a: &[f64], b: &[f64]| sample_variance(b) / sample_variance(a);
        let value = ratio(a, b);
        let se = jackknife(data.len(), |idx| ratio(&pick(a, idx), &pick(b, idx)));
        let growth = (config.eps[last].ln() / config.eps[0].ln()).powi(3);
        out.checks.push(
            Check::new(
                "g_variance_ratio",
                format!(
                    "Var[g_eps] grows at most like |log eps|^3 from eps={} to eps={} (1.5x slack)",
                    config.eps[0], config.eps[last]
                ),
                value,
                Relation::AtMost,
                growth * 1.5,
            )
            .with_slack(se, 0.0),
        );
    }
    Ok(out)
}
