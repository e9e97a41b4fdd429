//! Acceptance run. Prints one PASS/FAIL line per criterion, with the
//! underlying checks indented beneath it, and exits non-zero if any fails.
//!
//! Statistical criteria read the shipped configs in `configs/`; fields on the
//! n = 512 disk are sampled once and shared between experiments.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;

use lqg::gmc_measure::{build_boundary_measure, build_liouville_measure};
use lqg::grid_field::{green_table, sample_gff};
use lqg::lbm::{default_dt, quantum_clock, sample_brownian_path};
use lqg::reconstruct::{boundary_estimate, estimate_field, make_kernel, KernelDim};
use lqg::stats_harness::{export_report, run_ensemble, run_suite, EnsembleResult, ExperimentConfig};
use lqg::{DomainSpec, ExecutionMode, Point};

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn from_checks(results: &[&EnsembleResult], names: &[&str]) -> Self {
        let checks: Vec<_> = results
            .iter()
            .flat_map(|r| r.aggregate.checks.iter())
            .filter(|c| names.iter().any(|n| c.name.starts_with(n)))
            .collect();
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed());
        let summary = if checks.is_empty() { "no checks produced".to_string() } else { format!("{} checks", checks.len()) };
        Outcome { passed, summary, details: checks.iter().map(|c| c.to_string()).collect() }
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> ExperimentConfig {
    let path = configs_dir().join(format!("{name}.txt"));
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ExperimentConfig::parse(&text, None).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn green_oracle() -> Outcome {
    let n = 16usize;
    let start = Instant::now();
    let g = green_table(DomainSpec::square(n as u32).unwrap()).unwrap();
    let elapsed = start.elapsed();
    let m = n - 1;
    let size = m * m;
    let k = DMatrix::from_fn(size, size, |a, b| {
        let (ai, aj, bi, bj) = (a % m, a / m, b % m, b / m);
        match ai.abs_diff(bi) + aj.abs_diff(bj) {
            0 => 4.0,
            1 => -1.0,
            _ => 0.0,
        }
    });
    let inv = k.cholesky().expect("Laplacian is positive definite").inverse() * (2.0 * PI);
    let mut worst = 0.0f64;
    for a in 0..size {
        for b in 0..size {
            let v = g.get((a % m + 1, a / m + 1), (b % m + 1, b / m + 1));
            worst = worst.max((v - inv[(a, b)]).abs());
        }
    }
    Outcome {
        passed: worst < 1e-8 && elapsed.as_secs_f64() < 1.0,
        summary: format!("max abs error {worst:.3e} (< 1e-8), build {:.3} s (< 1 s)", elapsed.as_secs_f64()),
        details: Vec::new(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn max_rel(a: impl IntoIterator<Item = f64>, b: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| rel(x, y)).fold(0.0, f64::max)
}

fn exact_identities() -> Outcome {
    const TOL: f64 = 1e-12;
    let (n, gamma, eps, c) = (64u32, 0.8, 0.125, 1.3);
    let disk = DomainSpec::disk(n).unwrap();
    let upper = DomainSpec::upper_disk(n).unwrap();
    let f = sample_gff(disk, 11).unwrap();
    let u = sample_gff(upper, 11).unwrap();
    let mut rows = Vec::new();

    let mu = build_liouville_measure(&f, gamma, eps).unwrap();
    let mu_c = build_liouville_measure(&f.shifted(c), gamma, eps).unwrap();
    let k = (gamma * c).exp();
    rows.push(("area measure scales by exp(gamma C)", max_rel(mu.masses().iter().map(|m| m * k), mu_c.masses().iter().copied())));

    let nu = build_boundary_measure(&u, gamma, eps).unwrap();
    let nu_c = build_boundary_measure(&u.shifted(c), gamma, eps).unwrap();
    let k2 = (gamma * c / 2.0).exp();
    rows.push(("boundary measure scales by exp(gamma C / 2)", max_rel(nu.masses().iter().map(|m| m * k2), nu_c.masses().iter().copied())));

    let path = sample_brownian_path(&disk, default_dt(n), 11).unwrap();
    let clock = quantum_clock(&path, &f, gamma, eps).unwrap();
    let clock_c = quantum_clock(&path, &f.shifted(c), gamma, eps).unwrap();
    rows.push(("clock scales by exp(gamma C)", max_rel(clock.phi().iter().map(|t| t * k), clock_c.phi().iter().copied())));

    let kernel = make_kernel(eps, KernelDim::Two, n).unwrap();
    let probes = [Point::ORIGIN, Point::new(0.3, -0.2), Point::new(-0.5, 0.4)];
    let est = estimate_field(&mu, &kernel, gamma, &probes).unwrap();
    let est_c = estimate_field(&mu_c, &kernel, gamma, &probes).unwrap();
    let worst = est.values.iter().zip(&est_c.values).map(|(a, b)| ((b - a) - c).abs() / c).fold(0.0, f64::max);
    rows.push(("area estimate shifts by C", worst));

    let kernel1 = make_kernel(eps, KernelDim::One, n).unwrap();
    let xs = [-0.5, 0.0, 0.25, 0.6];
    let b = boundary_estimate(&nu, &kernel1, gamma, &xs).unwrap();
    let b_c = boundary_estimate(&nu_c, &kernel1, gamma, &xs).unwrap();
    let worst = b.values.iter().zip(&b_c.values).map(|(x, y)| ((y - x) - c).abs() / c).fold(0.0, f64::max);
    rows.push(("boundary estimate shifts by C", worst));

    let lebesgue = build_liouville_measure(&f, 0.0, eps).unwrap();
    let l = disk.lattice();
    let area: Vec<f64> = (0..l.cells_y())
        .flat_map(|cj| (0..l.cells_x()).map(move |ci| (ci, cj)))
        .map(|(ci, cj)| if l.contains(l.cell_center(ci, cj)) { l.cell_area() } else { 0.0 })
        .collect();
    rows.push(("gamma = 0 area measure is Lebesgue", max_rel(lebesgue.masses().iter().copied(), area)));
    let identity = quantum_clock(&path, &f, 0.0, eps).unwrap();
    rows.push(("gamma = 0 clock is the identity", max_rel(identity.phi().iter().copied(), path.times().iter().copied())));

    let passed = rows.iter().all(|(_, e)| *e <= TOL);
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Outcome {
        passed,
        summary: format!("worst relative deviation {worst:.3e} (<= {TOL:e})"),
        details: rows
            .iter()
            .map(|(what, e)| format!("{} {what}: {e:.3e}", if *e <= TOL { "PASS" } else { "FAIL" }))
            .collect(),
    }
}

fn exponents(one: &EnsembleResult, two: &EnsembleResult) -> Outcome {
    let zeta = |r: &EnsembleResult| r.aggregate.fits.iter().find(|f| f.name.starts_with("zeta")).map(|f| (f.slope, f.se));
    let mut out = Outcome::from_checks(&[one], &["zeta_1v1_deviation"]);
    match (zeta(one), zeta(two)) {
        (Some((z1, s1)), Some((z2, s2))) => {
            let ordered = z2 > z1;
            out.details.push(format!(
                "{} 2v2-proxy above 1v1: zeta_2v2={z2:.4} (se {s2:.4}) > zeta_1v1={z1:.4} (se {s1:.4})",
                if ordered { "PASS" } else { "FAIL" }
            ));
            out.passed &= ordered;
            out.summary = format!("zeta_1v1={z1:.4}, zeta_2v2={z2:.4}");
        }
        _ => {
            out.passed = false;
            out.summary = "missing exponent fit".into();
        }
    }
    out
}

fn determinism() -> Outcome {
    let mut cfg = load("variance");
    for (k, v) in [("n", "128"), ("replicates", "24"), ("eps", "2^-3,2^-4,2^-5")] {
        cfg.set(k, v).unwrap();
    }
    let tmp = tempfile::tempdir().unwrap();
    let dirs = [tmp.path().join("first"), tmp.path().join("second")];
    for d in &dirs {
        let r = run_ensemble(&cfg).unwrap();
        export_report(&r, d).unwrap();
    }
    let mut details = Vec::new();
    let mut passed = true;
    let mut names: Vec<_> = fs::read_dir(&dirs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    for name in &names {
        let same = fs::read(dirs[0].join(name)).unwrap() == fs::read(dirs[1].join(name)).unwrap();
        passed &= same;
        details.push(format!("{} {name}", if same { "PASS" } else { "FAIL" }));
    }
    Outcome { passed: passed && !names.is_empty(), summary: format!("{} CSV files compared", names.len()), details }
}

fn report(id: u32, title: &str, started: Instant, outcome: &Outcome) {
    println!(
        "{} criterion {id:>2} {title}: {} [{:.1} s]",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.summary,
        started.elapsed().as_secs_f64()
    );
    for d in &outcome.details {
        println!("      {d}");
    }
}

fn main() -> ExitCode {
    let mode = ExecutionMode::default();
    let mut all = true;
    let mut record = |id: u32, title: &str, started: Instant, outcome: Outcome| {
        report(id, title, started, &outcome);
        all &= outcome.passed;
    };

    let t = Instant::now();
    record(1, "green oracle", t, green_oracle());

    let t = Instant::now();
    record(4, "exact identities", t, exact_identities());

    let t = Instant::now();
    let measure = run_ensemble(&load("measure-expectation")).unwrap();
    record(3, "measure expectation", t, Outcome::from_checks(&[&measure], &["mass_ratio_deviation"]));

    // Criteria 2, 5, 6, 7 and 8 share the n = 512 disk fields.
    let t = Instant::now();
    let names = ["circle-variance", "variance", "covariance", "reconstruction", "boundary"];
    let suite = run_suite(&names.map(load), mode).unwrap();
    let shared = t.elapsed().as_secs_f64();
    println!("      shared n = 512 ensemble: {shared:.1} s");
    let mut log_law = Outcome::from_checks(&[&suite[0]], &["log_law_slope_deviation"]);
    for f in &suite[0].aggregate.fits {
        log_law.details.push(format!("fit {}: slope={:.4} se={:.4}", f.name, f.slope, f.se));
    }
    record(2, "circle-average log law", t, log_law);
    record(5, "residual variance growth", t, Outcome::from_checks(&[&suite[1]], &["residual_variance_log_ratio"]));
    record(6, "residual covariance decay", t, Outcome::from_checks(&[&suite[2]], &["residual_covariance_halving"]));
    record(7, "area reconstruction", t, Outcome::from_checks(&[&suite[3]], &["reconstruction_corr"]));
    record(8, "boundary reconstruction", t, Outcome::from_checks(&[&suite[4]], &["boundary_corr"]));

    let t = Instant::now();
    let ext = run_ensemble(&load("lbm-extension")).unwrap();
    record(9, "harmonic extension", t, Outcome::from_checks(&[&ext], &["extension_corr", "g_variance_ratio"]));

    let t = Instant::now();
    let runs = run_suite(&[load("exponent-1v1"), load("exponent-2v2")], mode).unwrap();
    record(10, "non-intersection exponents", t, exponents(&runs[0], &runs[1]));

    let t = Instant::now();
    record(11, "determinism", t, determinism());

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
