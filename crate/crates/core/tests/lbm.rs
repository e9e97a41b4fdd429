use lqg::exec::map_indices;
use lqg::grid_field::{circle_variance, green_table, sample_gff, GffSampler};
use lqg::lbm::{
    default_dt, harmonic_extension_estimator, harmonic_measure, harmonic_measure_polyline, lbm_trajectory,
    occupation_by_cells, occupation_quantum_measure, quantum_clock, sample_brownian_path, BrownianPath, ExitKind,
    ExtensionWindows, SUBDOMAIN_RADIUS,
};
use lqg::{DomainSpec, ExecutionMode, FieldGrid, Point};

fn paths(n: u32, count: usize, base: u64) -> Vec<BrownianPath> {
    let d = DomainSpec::disk(n).unwrap();
    map_indices(ExecutionMode::default(), count, |i| sample_brownian_path(&d, default_dt(n), base + i as u64).unwrap())
}

#[test]
fn path_starts_at_origin_and_ends_on_the_subdomain_circle() {
    for p in paths(32, 20, 0) {
        assert_eq!(p.positions()[0], Point::ORIGIN);
        assert_eq!(p.exit(), ExitKind::Subdomain);
        assert!((p.exit_point().norm() - SUBDOMAIN_RADIUS).abs() < 1e-12);
        assert!(p.positions()[..p.len() - 1].iter().all(|q| q.norm() < SUBDOMAIN_RADIUS));
        let t = p.times();
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
    let d = DomainSpec::disk(32).unwrap();
    assert!(sample_brownian_path(&d, 2.0 / (32.0 * 32.0), 1).is_err());
    assert!(sample_brownian_path(&DomainSpec::square(32).unwrap(), default_dt(32), 1).is_err());
}

#[test]
fn mean_exit_time_of_half_disk_is_one_eighth() {
    // E τ = (r² - |z|²)/2 for planar Brownian motion leaving a disk.
    let ps = paths(64, 10_000, 10);
    let mean = ps.iter().map(|p| p.exit_time()).sum::<f64>() / ps.len() as f64;
    assert!((mean / 0.125 - 1.0).abs() < 0.03, "mean exit time {mean}");
}

#[test]
fn exit_points_are_uniform_on_the_circle() {
    let ps = paths(32, 10_000, 20_000);
    let mut counts = [0usize; 16];
    for p in &ps {
        let q = p.exit_point();
        let a = q.y.atan2(q.x).rem_euclid(std::f64::consts::TAU);
        counts[((a / std::f64::consts::TAU * 16.0) as usize).min(15)] += 1;
    }
    let expected = ps.len() as f64 / 16.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99th percentile of chi-square with 15 degrees of freedom.
    assert!(chi2 < 30.578, "chi-square {chi2}, counts {counts:?}");
}

#[test]
fn clock_shift_scales_every_timestamp() {
    let d = DomainSpec::disk(32).unwrap();
    let path = sample_brownian_path(&d, default_dt(32), 4).unwrap();
    let f = sample_gff(d, 4).unwrap();
    let (gamma, eps, c) = (0.7, 0.125, 0.9);
    let a = quantum_clock(&path, &f, gamma, eps).unwrap();
    let b = quantum_clock(&path, &f.shifted(c), gamma, eps).unwrap();
    let k = (gamma * c).exp();
    assert_eq!(a.phi()[0], 0.0);
    for (x, y) in a.phi().iter().zip(b.phi()) {
        assert!((y - k * x).abs() <= 1e-12 * y.abs().max(1e-300), "{x} {y}");
    }
    assert!(a.phi().windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn gamma_zero_trajectory_is_the_path() {
    let d = DomainSpec::disk(32).unwrap();
    let path = sample_brownian_path(&d, default_dt(32), 8).unwrap();
    let clock = quantum_clock(&path, &FieldGrid::zeros(d), 0.0, 0.125).unwrap();
    assert_eq!(clock.phi(), path.times());
    let z = lbm_trajectory(&path, &clock).unwrap();
    for (t, p) in path.times().iter().zip(path.positions()) {
        assert_eq!(z.at(*t), *p);
    }
}

#[test]
fn trajectory_has_the_range_of_the_path() {
    let d = DomainSpec::disk(32).unwrap();
    let path = sample_brownian_path(&d, default_dt(32), 9).unwrap();
    let clock = quantum_clock(&path, &sample_gff(d, 9).unwrap(), 0.5, 0.125).unwrap();
    let z = lbm_trajectory(&path, &clock).unwrap();
    assert_eq!(z.positions(), path.positions());
    let mut sampled = z.sample(clock.phi());
    sampled.dedup();
    assert!(sampled.iter().all(|p| path.positions().contains(p)));
}

#[test]
fn quadratic_variation_recovers_inverse_clock() {
    let n = 64;
    let d = DomainSpec::disk(n).unwrap();
    let sampler = GffSampler::new(d).unwrap();
    let ratios = map_indices(ExecutionMode::default(), 20, |i| {
        let path = sample_brownian_path(&d, default_dt(n), 300 + i as u64).unwrap();
        let clock = quantum_clock(&path, &sampler.sample(300 + i as u64).unwrap(), 0.5, 0.0625).unwrap();
        let z = lbm_trajectory(&path, &clock).unwrap();
        let top = clock.total();
        let times: Vec<f64> = (0..=256).map(|k| top * k as f64 / 256.0).collect();
        z.quadratic_variation(&times) / z.inverse_clock(top)
    });
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 1.0).abs() < 0.1, "mean ratio {mean}");
}

#[test]
fn expected_clock_matches_lognormal_oracle() {
    // Field and path are independent, so E φ(τ) = E Σ_j Δt_j ε^{γ²/2} e^{γ² Var h_ε(B_j) / 2}.
    let (n, gamma, eps) = (32u32, 0.5, 0.125);
    let d = DomainSpec::disk(n).unwrap();
    let green = green_table(d).unwrap();
    // Variance along a radius; the disk lattice is close enough to isotropic.
    let radial: Vec<f64> = (0..=40)
        .map(|k| circle_variance(&green, Point::new(k as f64 / 64.0, 0.0), eps).unwrap())
        .collect();
    let var_at = |p: &Point| {
        let u = (p.norm() * 64.0).min(39.999);
        let k = u.floor() as usize;
        radial[k] + (u - k as f64) * (radial[k + 1] - radial[k])
    };
    let sampler = GffSampler::new(d).unwrap();
    let scale = eps.powf(gamma * gamma / 2.0);
    let pairs = map_indices(ExecutionMode::default(), 1000, |i| {
        let seed = 5000 + i as u64;
        let path = sample_brownian_path(&d, default_dt(n), seed).unwrap();
        let clock = quantum_clock(&path, &sampler.sample(seed).unwrap(), gamma, eps).unwrap();
        let oracle: f64 = path
            .positions()
            .iter()
            .zip(path.steps())
            .map(|(p, dt)| scale * (gamma * gamma * var_at(p) / 2.0).exp() * dt)
            .sum();
        (clock.total(), oracle)
    });
    let m = pairs.len() as f64;
    let empirical = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let oracle = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    assert!((empirical / oracle - 1.0).abs() < 0.1, "empirical {empirical}, oracle {oracle}");
}

#[test]
fn occupation_windows() {
    let d = DomainSpec::disk(32).unwrap();
    let path = sample_brownian_path(&d, default_dt(32), 12).unwrap();
    let zero = quantum_clock(&path, &FieldGrid::zeros(d), 0.0, 0.125).unwrap();
    // Euclidean occupation time by direct binning.
    for (c, r) in [(Point::new(0.1, 0.0), 0.1), (Point::new(-0.2, 0.3), 0.25), (Point::ORIGIN, 0.6)] {
        let direct: f64 = path
            .positions()
            .iter()
            .zip(path.steps())
            .filter(|(p, _)| p.dist(c) < r)
            .map(|(_, dt)| dt)
            .sum();
        let via = occupation_quantum_measure(&path, &zero, c, r).unwrap();
        assert!((via - direct).abs() < 1e-12);
    }
    assert_eq!(occupation_quantum_measure(&path, &zero, Point::new(0.8, 0.0), 0.15).unwrap(), 0.0);
    assert!(occupation_quantum_measure(&path, &zero, Point::new(0.9, 0.0), 0.2).is_err());

    let clock = quantum_clock(&path, &sample_gff(d, 12).unwrap(), 0.5, 0.125).unwrap();
    let cells: f64 = occupation_by_cells(&path, &clock, &d.lattice()).iter().sum();
    assert!((cells - clock.total()).abs() < 1e-12 * clock.total());
}

fn segment(a: Point, b: Point, pieces: usize) -> Vec<Point> {
    (0..=pieces)
        .map(|k| {
            let s = k as f64 / pieces as f64;
            Point::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))
        })
        .collect()
}

#[test]
fn harmonic_measure_of_a_segment_is_symmetric() {
    let d = DomainSpec::disk(64).unwrap();
    let seg = segment(Point::new(-0.5, 0.0), Point::new(0.5, 0.0), 2000);
    let omega = harmonic_measure_polyline(&seg, &d, Point::new(0.0, 0.4), 10_000, 2.0 / 64.0, 1).unwrap();
    let total: f64 = omega.cells().iter().map(|c| c.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let left: f64 = omega.cells().iter().filter(|c| omega.cell_center(c).x < 0.0).map(|c| c.weight).sum();
    assert!((left - 0.5).abs() < 0.02, "left mass {left}");
}

#[test]
fn boundary_mass_drops_as_viewpoint_nears_the_range() {
    let d = DomainSpec::disk(64).unwrap();
    let seg = segment(Point::new(-0.5, 0.0), Point::new(0.5, 0.0), 2000);
    let masses: Vec<f64> = [0.7, 0.45, 0.2]
        .iter()
        .map(|&y| {
            harmonic_measure_polyline(&seg, &d, Point::new(0.0, y), 10_000, 2.0 / 64.0, 2).unwrap().boundary_mass()
        })
        .collect();
    // Binomial standard error is at most 0.005.
    assert!(masses[0] > masses[1] + 0.02 && masses[1] > masses[2] + 0.02, "{masses:?}");
}

#[test]
fn resampling_walkers_moves_weights_by_monte_carlo_error() {
    let d = DomainSpec::disk(32).unwrap();
    let path = sample_brownian_path(&d, default_dt(32), 21).unwrap();
    let z = Point::new(0.0, 0.8);
    let a = harmonic_measure(&path, &d, z, 4000, 1.0 / 16.0, 1).unwrap();
    let b = harmonic_measure(&path, &d, z, 4000, 1.0 / 16.0, 2).unwrap();
    assert_ne!(a.cells(), b.cells());
    let diff = (a.boundary_mass() - b.boundary_mass()).abs();
    assert!(diff < 5.0 * (0.5f64 / 4000.0).sqrt(), "boundary mass moved by {diff}");
    assert!(harmonic_measure(&path, &d, z, 999, 1.0 / 16.0, 1).is_err());
}

#[test]
fn estimator_on_flat_field_is_log_euclidean_occupation() {
    let d = DomainSpec::disk(32).unwrap();
    let path = sample_brownian_path(&d, default_dt(32), 31).unwrap();
    let z = Point::new(0.0, 0.75);
    let omega = harmonic_measure(&path, &d, z, 2000, 1.0 / 16.0, 3).unwrap();
    let (gamma, eps) = (1e-3, 0.125);
    let clock = quantum_clock(&path, &FieldGrid::zeros(d), gamma, eps).unwrap();
    let est = harmonic_extension_estimator(z, &omega, &path, &clock, gamma, eps).unwrap();
    let scale = eps.powf(gamma * gamma / 2.0);
    let direct: f64 = omega
        .cells()
        .iter()
        .filter(|c| !c.is_boundary)
        .map(|c| {
            let x = omega.cell_center(c);
            let occ: f64 = path.positions().iter().zip(path.steps()).filter(|(p, _)| p.dist(x) < eps).map(|(_, t)| t).sum();
            if occ > 0.0 {
                c.weight * (scale * occ).ln() / gamma
            } else {
                0.0
            }
        })
        .sum();
    assert!(est.value.is_finite());
    assert!((est.value - direct).abs() < 1e-9 * direct.abs().max(1.0), "{} vs {direct}", est.value);
    let windows = ExtensionWindows::new(&omega, &path, eps).unwrap();
    assert_eq!(windows.estimate(&clock, gamma).unwrap(), est);
    assert!(ExtensionWindows::new(&omega, &path, 1.0 / 32.0).is_err());
}
