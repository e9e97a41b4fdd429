//! Experiment configuration from `key = value` text.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid_field::Shape;

/// The ensemble experiments the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    CircleVariance,
    MeasureExpectation,
    Variance,
    Covariance,
    Reconstruction,
    Boundary,
    LbmRun,
    LbmExtension,
    Exponent,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::CircleVariance,
        ExperimentKind::MeasureExpectation,
        ExperimentKind::Variance,
        ExperimentKind::Covariance,
        ExperimentKind::Reconstruction,
        ExperimentKind::Boundary,
        ExperimentKind::LbmRun,
        ExperimentKind::LbmExtension,
        ExperimentKind::Exponent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CircleVariance => "circle-variance",
            ExperimentKind::MeasureExpectation => "measure-expectation",
            ExperimentKind::Variance => "variance",
            ExperimentKind::Covariance => "covariance",
            ExperimentKind::Reconstruction => "reconstruction",
            ExperimentKind::Boundary => "boundary",
            ExperimentKind::LbmRun => "lbm-run",
            ExperimentKind::LbmExtension => "lbm-extension",
            ExperimentKind::Exponent => "exponent",
        }
    }

    /// Keys beyond the common ones that this experiment understands.
    pub fn extra_keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::MeasureExpectation => &["radius"],
            ExperimentKind::Reconstruction | ExperimentKind::Boundary => &["rho_radius"],
            ExperimentKind::LbmRun => &["qv_points"],
            ExperimentKind::LbmExtension => &["walkers", "path_seed", "min_distance", "target_eps"],
            ExperimentKind::Exponent => &["pair", "max_radius", "trials"],
            _ => &[],
        }
    }

    fn default_shape(self) -> Shape {
        match self {
            ExperimentKind::Boundary => Shape::UpperUnitDisk,
            _ => Shape::UnitDisk,
        }
    }

    fn allowed_shapes(self) -> &'static [Shape] {
        match self {
            ExperimentKind::CircleVariance
            | ExperimentKind::MeasureExpectation
            | ExperimentKind::Variance
            | ExperimentKind::Covariance => &[Shape::UnitDisk, Shape::UnitSquare],
            ExperimentKind::Boundary => &[Shape::UpperUnitDisk],
            _ => &[Shape::UnitDisk],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// later keys override earlier ones.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{raw}'", k + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", k + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Parses a dyadic scale written as a decimal, a fraction `1/8` or a power
/// `2^-3`.
pub fn parse_scale(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if let Some(exp) = s.strip_prefix("2^") {
        exp.parse::<i32>().map(|e| 2f64.powi(e)).ok()
    } else if let Some((a, b)) = s.split_once('/') {
        match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(a), Ok(b)) if b != 0.0 => Some(a / b),
            _ => None,
        }
    } else {
        s.parse::<f64>().ok()
    };
    let v = v.ok_or_else(|| Error::Config(format!("cannot parse scale '{s}'")))?;
    let e = v.log2().round();
    if !(v > 0.0) || 2f64.powi(e as i32) != v {
        return Err(Error::Config(format!("scale {s} is not a power of two")));
    }
    Ok(v)
}

/// A fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub domain: Shape,
    pub n: u32,
    pub gamma: f64,
    /// Strictly decreasing dyadic scales.
    pub eps: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    extras: BTreeMap<String, String>,
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
}

impl ExperimentConfig {
    /// Defaults for `kind`.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment: kind,
            domain: kind.default_shape(),
            n: 64,
            gamma: 0.5,
            eps: vec![0.125, 0.0625],
            replicates: 20,
            seed: 1,
            out: None,
            threads: None,
            extras: BTreeMap::new(),
        }
    }

    /// Applies `pairs` on top of the defaults. `kind` is used unless the
    /// pairs name an experiment.
    pub fn from_pairs(kind: Option<ExperimentKind>, pairs: &[(String, String)]) -> Result<Self> {
        let named = pairs.iter().rev().find(|(k, _)| k == "experiment").map(|(_, v)| v.parse()).transpose()?;
        let kind = match (kind, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("config names experiment '{b}' but '{a}' was requested")))
            }
            (_, Some(k)) | (Some(k), None) => k,
            (None, None) => return Err(Error::Config("no experiment named".into())),
        };
        let mut cfg = ExperimentConfig::new(kind);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses config text.
    pub fn parse(text: &str, kind: Option<ExperimentKind>) -> Result<Self> {
        Self::from_pairs(kind, &parse_pairs(text)?)
    }

    /// Sets one key without validating the whole config.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                let k: ExperimentKind = value.parse()?;
                if k != self.experiment {
                    return Err(Error::Config(format!("cannot change experiment to '{k}'")));
                }
            }
            "domain" => self.domain = value.parse()?,
            "n" => self.n = parse_num(key, value)?,
            "gamma" => self.gamma = parse_num(key, value)?,
            "eps" => self.eps = value.split(',').map(parse_scale).collect::<Result<_>>()?,
            "replicates" => self.replicates = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "threads" => self.threads = Some(parse_num(key, value)?),
            other if self.experiment.extra_keys().contains(&other) => {
                self.extras.insert(other.to_string(), value.to_string());
            }
            other => {
                return Err(Error::Config(format!("unknown key '{other}' for experiment {}", self.experiment)))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.experiment.allowed_shapes().contains(&self.domain) {
            return Err(Error::Config(format!("experiment {} does not run on {}", self.experiment, self.domain)));
        }
        crate::grid_field::DomainSpec::with_default_boundary(self.domain, self.n)
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(0.0..2.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 2), got {}", self.gamma)));
        }
        if self.replicates < 2 {
            return Err(Error::Config(format!("need at least 2 replicates, got {}", self.replicates)));
        }
        if self.eps.is_empty() {
            return Err(Error::Config("the eps list is empty".into()));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("the eps list must be strictly decreasing".into()));
        }
        for &e in &self.eps {
            crate::gmc_measure::dyadic_level(e, self.n).map_err(|err| Error::Config(err.to_string()))?;
        }
        Ok(())
    }

    pub fn extra(&self, key: &str) -> Option<&str> {
        self.extras.get(key).map(String::as_str)
    }

    /// An extra key parsed as `T`, or `default`.
    pub fn extra_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.extra(key) {
            Some(v) => parse_num(key, v),
            None => Ok(default),
        }
    }

    /// Canonical `key = value` text; parsing it gives back this config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        line("experiment", self.experiment.to_string());
        line("domain", self.domain.name().to_string());
        line("n", self.n.to_string());
        line("gamma", self.gamma.to_string());
        line("eps", self.eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","));
        line("replicates", self.replicates.to_string());
        line("seed", self.seed.to_string());
        if let Some(o) = &self.out {
            line("out", o.display().to_string());
        }
        if let Some(t) = self.threads {
            line("threads", t.to_string());
        }
        for (k, v) in &self.extras {
            line(k, v.clone());
        }
        s
    }
}
