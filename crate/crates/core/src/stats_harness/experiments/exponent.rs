use crate::error::{Error, Result};
use crate::grid_field::{DomainSpec, FieldGrid};
use crate::rng::{stream_rng, streams};
use crate::stats_harness::config::ExperimentConfig;
use crate::stats_harness::ensemble::{Aggregate, Check, Experiment, NamedFit, Relation, Table};
use crate::stats_harness::exponent::{exponent_from_counts, radius_ladder, survival_counts, PairSpec};

use super::Columns;

const MIN_TRIALS: usize = 10_000;

struct Settings {
    pair: PairSpec,
    radii: Vec<u32>,
    trials: usize,
}

fn settings(config: &ExperimentConfig) -> Result<Settings> {
    let pair: PairSpec = config.extra("pair").unwrap_or("1v1").parse()?;
    let max_radius: u32 = config.extra_or("max_radius", 256)?;
    let trials: usize = config.extra_or("trials", 100_000)?;
    let radii = radius_ladder(max_radius).map_err(|e| Error::Config(e.to_string()))?;
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    if trials < config.replicates {
        return Err(Error::Config("fewer trials than batches".into()));
    }
    Ok(Settings { pair, radii, trials })
}

pub(super) fn columns(config: &ExperimentConfig) -> Vec<String> {
    let radii = settings(config).map(|s| s.radii).unwrap_or_default();
    std::iter::once("trials".to_string()).chain(radii.iter().map(|r| format!("survive_r{r}"))).collect()
}

/// Replicates are batches of walk trials; batch `i` runs
/// `trials / replicates` trials (plus one for the first remainder batches).
pub(super) struct Exponent {
    settings: Settings,
    seeds: u64,
    replicates: usize,
}

impl Exponent {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        Ok(Exponent { settings: settings(config)?, seeds: config.seed, replicates: config.replicates })
    }
}

impl Experiment for Exponent {
    fn field_domain(&self) -> Option<DomainSpec> {
        None
    }

    fn constants(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn observe(&self, _field: Option<&FieldGrid>, seed: u64) -> Result<Vec<f64>> {
        let s = &self.settings;
        let index = seed.wrapping_sub(self.seeds) as usize;
        let size = s.trials / self.replicates + usize::from(index < s.trials % self.replicates);
        let counts = survival_counts(s.pair, &s.radii, size, &mut stream_rng(seed, streams::EXPONENT));
        Ok(std::iter::once(size as f64).chain(counts.into_iter().map(|c| c as f64)).collect())
    }
}

pub(super) fn aggregate(config: &ExperimentConfig, data: &Columns) -> Result<Aggregate> {
    let s = settings(config)?;
    let mut out = Aggregate {
        table: Table::new(&["radius", "survivors", "trials", "probability"]),
        ..Default::default()
    };
    if data.len() == 0 {
        return Ok(out);
    }
    let trials = data.get("trials").iter().sum::<f64>() as usize;
    let survivors: Vec<u64> =
        s.radii.iter().map(|r| data.get(&format!("survive_r{r}")).iter().sum::<f64>() as u64).collect();
    for (r, c) in s.radii.iter().zip(&survivors) {
        out.table.push_numbers(&[*r as f64, *c as f64, trials as f64, *c as f64 / trials as f64]);
    }
    let est = exponent_from_counts(s.pair, &s.radii, &survivors, trials)?;
    out.fits.push(NamedFit {
        name: format!("zeta_{}", s.pair),
        slope: est.zeta,
        intercept: f64::NAN,
        r2: est.r2,
        se: est.stderr,
    });
    match s.pair {
        PairSpec::OneVsOne => out.checks.push(
            Check::new(
                "zeta_1v1_deviation",
                "one-against-one non-intersection exponent near 5/4: |zeta - 1.25|",
                (est.zeta - 1.25).abs(),
                Relation::AtMost,
                0.3,
            )
            .with_slack(est.stderr, 0.0),
        ),
        PairSpec::Single => out.checks.push(Check::new(
            "single_walk_slope",
            "a lone walk always survives: |zeta|",
            est.zeta.abs(),
            Relation::AtMost,
            0.0,
        )),
        PairSpec::TwoVsTwoProxy => {}
    }
    Ok(out)
}
