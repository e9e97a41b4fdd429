//! The `lqg` command line.
//!
//! Every subcommand reads an optional `key = value` config file, applies
//! flag overrides on top, echoes the effective config into the output
//! directory and writes CSV results there. Exit codes: 0 on success, 1 when
//! an experiment check fails or the run breaks, 2 on configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use lqg::gmc_measure::io::{save_measure, write_line_measure_csv};
use lqg::gmc_measure::{build_boundary_measure, build_liouville_measure};
use lqg::grid_field::io::save_field;
use lqg::grid_field::GffSampler;
use lqg::lbm::io::{write_harmonic_measure_csv, write_path_csv};
use lqg::lbm::{choose_viewpoint, default_dt, harmonic_measure, quantum_clock, sample_brownian_path};
use lqg::stats_harness::{export_report, parse_pairs, parse_scale, run_ensemble, ExperimentConfig, ExperimentKind};
use lqg::{exec, DomainSpec, Error, FieldGrid, Shape};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lqg", version, about = "Liouville quantum gravity simulations and verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample GFF replicates and save them as binary field files.
    GffSample(Flags),
    /// Sample fields and build their area (or boundary) measures.
    MeasureBuild(Flags),
    /// Correlation of reconstructed and true test-function pairings.
    ReconRun(Flags),
    /// Growth of the residual variance as eps decreases.
    VerifyVariance(Flags),
    /// Decay of the residual covariance at fixed separation.
    VerifyCovariance(Flags),
    /// Circle-average variance against log(1/eps).
    VerifyCircleVariance(Flags),
    /// Mean cell mass against the lognormal oracle.
    VerifyMeasure(Flags),
    /// Boundary-measure reconstruction on the upper half disk.
    BoundaryRecon(Flags),
    /// Brownian paths, the quantum clock and the time-changed path.
    LbmRun(Flags),
    /// Harmonic extension off a fixed Brownian range.
    LbmExtension(Flags),
    /// Non-intersection exponents of random walks.
    ExponentEstimate(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated dyadic scales, e.g. `1/8,1/16` or `2^-3,2^-4`.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

impl Flags {
    /// Config-file pairs followed by flag pairs, so flags win.
    fn pairs(&self) -> lqg::Result<Vec<(String, String)>> {
        let mut pairs = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
                parse_pairs(&text)?
            }
            None => Vec::new(),
        };
        let flags = [
            ("domain", self.domain.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("eps", self.eps.clone()),
            ("replicates", self.replicates.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("threads", self.threads.map(|v| v.to_string())),
        ];
        pairs.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        Ok(pairs)
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GffSample(_) => "gff-sample",
            Command::MeasureBuild(_) => "measure-build",
            Command::ReconRun(_) => "recon-run",
            Command::VerifyVariance(_) => "verify-variance",
            Command::VerifyCovariance(_) => "verify-covariance",
            Command::VerifyCircleVariance(_) => "verify-circle-variance",
            Command::VerifyMeasure(_) => "verify-measure",
            Command::BoundaryRecon(_) => "boundary-recon",
            Command::LbmRun(_) => "lbm-run",
            Command::LbmExtension(_) => "lbm-extension",
            Command::ExponentEstimate(_) => "exponent-estimate",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::GffSample(f)
            | Command::MeasureBuild(f)
            | Command::ReconRun(f)
            | Command::VerifyVariance(f)
            | Command::VerifyCovariance(f)
            | Command::VerifyCircleVariance(f)
            | Command::VerifyMeasure(f)
            | Command::BoundaryRecon(f)
            | Command::LbmRun(f)
            | Command::LbmExtension(f)
            | Command::ExponentEstimate(f) => f,
        }
    }

    fn experiment(&self) -> Option<ExperimentKind> {
        Some(match self {
            Command::ReconRun(_) => ExperimentKind::Reconstruction,
            Command::VerifyVariance(_) => ExperimentKind::Variance,
            Command::VerifyCovariance(_) => ExperimentKind::Covariance,
            Command::VerifyCircleVariance(_) => ExperimentKind::CircleVariance,
            Command::VerifyMeasure(_) => ExperimentKind::MeasureExpectation,
            Command::BoundaryRecon(_) => ExperimentKind::Boundary,
            Command::LbmRun(_) => ExperimentKind::LbmRun,
            Command::LbmExtension(_) => ExperimentKind::LbmExtension,
            Command::ExponentEstimate(_) => ExperimentKind::Exponent,
            Command::GffSample(_) | Command::MeasureBuild(_) => return None,
        })
    }
}

/// Settings of the sampling subcommands.
#[derive(Debug, Clone, PartialEq)]
struct SampleSettings {
    domain: DomainSpec,
    gamma: f64,
    eps: Vec<f64>,
    replicates: usize,
    seed: u64,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

impl SampleSettings {
    fn from_pairs(pairs: &[(String, String)]) -> lqg::Result<Self> {
        let bad = |k: &str, v: &str| Error::Config(format!("invalid value '{v}' for {k}"));
        let (mut shape, mut n) = (Shape::UnitSquare, 64u32);
        let mut s = SampleSettings {
            domain: DomainSpec::square(64)?,
            gamma: 0.5,
            eps: vec![0.125],
            replicates: 1,
            seed: 1,
            out: None,
            threads: None,
        };
        for (k, v) in pairs {
            match k.as_str() {
                "domain" => shape = v.parse()?,
                "n" => n = v.parse().map_err(|_| bad(k, v))?,
                "gamma" => s.gamma = v.parse().map_err(|_| bad(k, v))?,
                "eps" => s.eps = v.split(',').map(parse_scale).collect::<lqg::Result<_>>()?,
                "replicates" => s.replicates = v.parse().map_err(|_| bad(k, v))?,
                "seed" => s.seed = v.parse().map_err(|_| bad(k, v))?,
                "out" => s.out = Some(PathBuf::from(v)),
                "threads" => s.threads = Some(v.parse().map_err(|_| bad(k, v))?),
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        s.domain = DomainSpec::with_default_boundary(shape, n).map_err(|e| Error::Config(e.to_string()))?;
        if s.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        if !(0.0..2.0).contains(&s.gamma) {
            return Err(Error::Config(format!("gamma must lie in [0, 2), got {}", s.gamma)));
        }
        for &e in &s.eps {
            lqg::gmc_measure::dyadic_level(e, n).map_err(|err| Error::Config(err.to_string()))?;
        }
        Ok(s)
    }

    fn to_text(&self) -> String {
        let mut t = format!(
            "domain = {}\nn = {}\ngamma = {}\neps = {}\nreplicates = {}\nseed = {}\n",
            self.domain.shape().name(),
            self.domain.resolution(),
            self.gamma,
            self.eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
            self.replicates,
            self.seed
        );
        if let Some(o) = &self.out {
            t.push_str(&format!("out = {}\n", o.display()));
        }
        if let Some(th) = self.threads {
            t.push_str(&format!("threads = {th}\n"));
        }
        t
    }
}

fn default_out(command: &str) -> PathBuf {
    PathBuf::from("lqg-out").join(command)
}

fn run_sampling(command: &Command, settings: &SampleSettings) -> lqg::Result<i32> {
    exec::configure_threads(settings.threads);
    let out = settings.out.clone().unwrap_or_else(|| default_out(command.name()));
    let sampler = GffSampler::new(settings.domain)?;
    let seeds: Vec<u64> = (0..settings.replicates).map(|i| settings.seed.wrapping_add(i as u64)).collect();
    let fields = exec::map_slice(exec::ExecutionMode::default(), &seeds, |&s| sampler.sample(s))
        .into_iter()
        .collect::<lqg::Result<Vec<FieldGrid>>>()?;

    let mut index = String::new();
    match command {
        Command::GffSample(_) => {
            index.push_str("seed,file\n");
            fs::create_dir_all(&out)?;
            for f in &fields {
                let seed = f.seed().unwrap_or_default();
                let name = format!("field_{seed}.lqgf");
                save_field(f, &out.join(&name))?;
                index.push_str(&format!("{seed},{name}\n"));
            }
            fs::write(out.join("fields.csv"), index)?;
        }
        _ => {
            // Build all measures before writing anything.
            let upper = settings.domain.shape() == Shape::UpperUnitDisk;
            let mut built = Vec::new();
            for f in &fields {
                for &e in &settings.eps {
                    let seed = f.seed().unwrap_or_default();
                    if upper {
                        built.push((seed, e, None, Some(build_boundary_measure(f, settings.gamma, e)?)));
                    } else {
                        built.push((seed, e, Some(build_liouville_measure(f, settings.gamma, e)?), None));
                    }
                }
            }
            fs::create_dir_all(&out)?;
            index.push_str("seed,eps,gamma,total_mass,file\n");
            for (seed, e, area, line) in built {
                let (total, name) = match (area, line) {
                    (Some(m), _) => {
                        let name = format!("measure_{seed}_eps{e}.lqgm");
                        save_measure(&m, &out.join(&name))?;
                        (m.total_mass(), name)
                    }
                    (None, Some(m)) => {
                        let name = format!("boundary_measure_{seed}_eps{e}.csv");
                        let mut w = BufWriter::new(fs::File::create(out.join(&name))?);
                        write_line_measure_csv(&m, &mut w)?;
                        (m.total_mass(), name)
                    }
                    (None, None) => unreachable!("every entry holds one measure"),
                };
                index.push_str(&format!("{seed},{e},{},{total},{name}\n", settings.gamma));
            }
            fs::write(out.join("measures.csv"), index)?;
        }
    }
    fs::write(out.join("config.txt"), settings.to_text())?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

/// Extra per-command dumps next to the ensemble report.
fn write_extras(command: &Command, config: &ExperimentConfig, out: &Path) -> lqg::Result<()> {
    let domain = DomainSpec::with_default_boundary(config.domain, config.n)?;
    match command {
        Command::LbmRun(_) => {
            let path = sample_brownian_path(&domain, default_dt(config.n), config.seed)?;
            let field = if config.gamma == 0.0 { FieldGrid::zeros(domain) } else { GffSampler::new(domain)?.sample(config.seed)? };
            let clock = quantum_clock(&path, &field, config.gamma, config.eps[0])?;
            let mut w = BufWriter::new(fs::File::create(out.join("path.csv"))?);
            write_path_csv(&path, Some(&clock), &mut w)?;
        }
        Command::LbmExtension(_) => {
            let path_seed: u64 = config.extra_or("path_seed", config.seed)?;
            let walkers: usize = config.extra_or("walkers", 10_000)?;
            let min_distance: f64 = config.extra_or("min_distance", 0.25)?;
            let path = sample_brownian_path(&domain, default_dt(config.n), path_seed)?;
            let z = choose_viewpoint(&path, min_distance)?;
            let omega = harmonic_measure(&path, &domain, z, walkers, 2.0 / config.n as f64, path_seed)?;
            let mut w = BufWriter::new(fs::File::create(out.join("harmonic_measure.csv"))?);
            write_harmonic_measure_csv(&omega, &mut w)?;
            let mut w = BufWriter::new(fs::File::create(out.join("path.csv"))?);
            write_path_csv(&path, None, &mut w)?;
        }
        _ => {}
    }
    Ok(())
}

fn run_experiment(command: &Command, config: &ExperimentConfig) -> lqg::Result<i32> {
    exec::configure_threads(config.threads);
    let out = config.out.clone().unwrap_or_else(|| default_out(command.name()));
    let result = run_ensemble(config)?;
    export_report(&result, &out)?;
    write_extras(command, config, &out)?;
    for check in &result.aggregate.checks {
        println!("{check}");
    }
    println!("wrote {}", out.display());
    Ok(if result.passed() { EXIT_OK } else { EXIT_FAIL })
}

fn execute(command: &Command) -> lqg::Result<i32> {
    let pairs = command.flags().pairs()?;
    match command.experiment() {
        Some(kind) => {
            let config = ExperimentConfig::from_pairs(Some(kind), &pairs)?;
            run_experiment(command, &config)
        }
        None => run_sampling(command, &SampleSettings::from_pairs(&pairs)?),
    }
}

/// Runs the command line `argv` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lqg {}: {e}", cli.command.name());
            if e.is_configuration() {
                EXIT_CONFIG
            } else {
                EXIT_FAIL
            }
        }
    }
}
