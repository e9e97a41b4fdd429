use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lqg::exec::map_indices;
use lqg::gmc_measure::{build_boundary_measure, build_liouville_measure, CellMeasure, LineMeasure};
use lqg::grid_field::{sample_gff, GffSampler};
use lqg::reconstruct::{
    boundary_estimate, bump_profile, estimate_field, estimate_field_nodes, make_kernel, recenter,
    residual_statistics, test_function_pairing, KernelDim, NodeWindow, TestFunction,
};
use lqg::stats_harness::stats::jackknife_variance;
use lqg::{DomainSpec, ExecutionMode, FieldGrid, Point};

fn random_measure(n: u32, eps: f64, gamma: f64, seed: u64) -> CellMeasure {
    let d = DomainSpec::square(n).unwrap();
    let l = d.lattice();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mass = (0..l.cells_x() * l.cells_y()).map(|_| rng.random::<f64>() + 0.01).collect();
    CellMeasure::from_masses(d, eps, gamma, mass).unwrap()
}

/// `(1/γ) log Σ_c η(|c - p|/ε) m_c / Σ_c η(|c - p|/ε) h²` summed over every
/// cell, without stencils or transforms.
fn brute_force_2d(m: &CellMeasure, eps: f64, gamma: f64, p: Point) -> f64 {
    let l = m.lattice();
    let (mut num, mut den) = (0.0, 0.0);
    for cj in 0..l.cells_y() {
        for ci in 0..l.cells_x() {
            let w = bump_profile(l.cell_center(ci, cj).dist(p) / eps);
            num += w * m.mass(ci, cj);
            den += w * l.cell_area();
        }
    }
    (num / den).ln() / gamma
}

#[test]
fn node_estimates_match_brute_force() {
    for (n, eps) in [(32u32, 0.125), (64, 0.125)] {
        let gamma = 0.7;
        let m = random_measure(n, eps, gamma, n as u64);
        let k = make_kernel(eps, KernelDim::Two, n).unwrap();
        let l = *m.lattice();
        let margin = (eps * n as f64) as usize + 1;
        let w = NodeWindow { i0: margin, j0: margin, nx: l.nx - 2 * margin, ny: l.ny - 2 * margin };
        let est = estimate_field_nodes(&m, &k, gamma, w).unwrap();
        assert_eq!(est.degenerate, 0);
        let mut probes = Vec::new();
        for b in 0..w.ny {
            for a in 0..w.nx {
                let p = l.node_pos(w.i0 + a, w.j0 + b);
                let want = brute_force_2d(&m, eps, gamma, p);
                assert!((est.values[b * w.nx + a] - want).abs() < 1e-12, "node ({a}, {b})");
                probes.push(p);
            }
        }
        let direct = estimate_field(&m, &k, gamma, &probes).unwrap();
        for (x, y) in direct.values.iter().zip(&est.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn boundary_estimates_match_brute_force() {
    let (n, eps, gamma) = (16u32, 0.125, 0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = LineMeasure::from_masses(n, eps, gamma, (0..32).map(|_| rng.random::<f64>() + 0.01).collect()).unwrap();
    let k = make_kernel(eps, KernelDim::One, n).unwrap();
    let probes: Vec<f64> = (-12..=12).map(|i| i as f64 / n as f64).collect();
    let est = boundary_estimate(&m, &k, gamma, &probes).unwrap();
    for (x, got) in probes.iter().zip(&est.values) {
        let (mut num, mut den) = (0.0, 0.0);
        for b in 0..m.bins() {
            let w = bump_profile((m.bin_center(b) - x).abs() / eps);
            num += w * m.masses()[b];
            den += w * m.bin_length();
        }
        assert!((got - 2.0 * (num / den).ln() / gamma).abs() < 1e-12);
    }
    assert!(boundary_estimate(&m, &k, gamma, &[0.9]).is_err());
}

#[test]
fn kernel_normalisation_support_and_peak_scaling() {
    for n in [64u32, 256] {
        for dim in [KernelDim::One, KernelDim::Two] {
            let k = make_kernel(0.125, dim, n).unwrap();
            assert!((k.discrete_mass() - 1.0).abs() < 1e-10);
            assert_eq!(k.density(0.125, 0.0), 0.0);
            assert_eq!(k.density(-0.125, 0.0), 0.0);
            if dim == KernelDim::Two {
                assert_eq!(k.density(0.1, 0.1), 0.0);
            }
        }
    }
    // In 2D the peak scales as ε^{-2}.
    let n = 512;
    for e in [0.25, 0.125, 0.0625] {
        let a = make_kernel(e, KernelDim::Two, n).unwrap().peak();
        let b = make_kernel(e / 2.0, KernelDim::Two, n).unwrap().peak();
        assert!((b / a / 4.0 - 1.0).abs() < 0.02, "eps {e}: ratio {}", b / a);
    }
    assert!(make_kernel(1.0 / 64.0, KernelDim::Two, 64).is_err());
}

#[test]
fn lebesgue_measure_reconstructs_zero() {
    let d = DomainSpec::disk(32).unwrap();
    let mu = build_liouville_measure(&FieldGrid::zeros(d), 0.0, 0.125).unwrap();
    let k = make_kernel(0.125, KernelDim::Two, 32).unwrap();
    let probes = [Point::ORIGIN, Point::new(0.25, -0.125), Point::new(-0.5, 0.25)];
    let est = estimate_field(&mu, &k, 0.5, &probes).unwrap();
    assert!(est.values.iter().all(|v| v.abs() < 1e-12), "{:?}", est.values);

    let u = DomainSpec::upper_disk(32).unwrap();
    let nu = build_boundary_measure(&FieldGrid::zeros(u), 0.0, 0.125).unwrap();
    let k1 = make_kernel(0.125, KernelDim::One, 32).unwrap();
    let est = boundary_estimate(&nu, &k1, 0.5, &[-0.5, 0.0, 0.3125]).unwrap();
    assert!(est.values.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn small_gamma_residuals_are_nondegenerate() {
    let d = DomainSpec::disk(64).unwrap();
    let (gamma, eps) = (0.1, 0.125);
    let k = make_kernel(eps, KernelDim::Two, 64).unwrap();
    let reps: Vec<_> = (0..20)
        .map(|s| {
            let f = sample_gff(d, s).unwrap();
            let m = build_liouville_measure(&f, gamma, eps).unwrap();
            (f, m)
        })
        .collect();
    let probes = [Point::ORIGIN, Point::new(0.25, 0.0)];
    let stats = residual_statistics(&reps, &k, gamma, &probes, &[(0, 1)]).unwrap();
    for p in &stats.probes {
        assert!(p.var.is_finite() && p.var > 0.0);
    }
    assert!(stats.pairs[0].cov.is_finite());
}

#[test]
fn pairing_error_shrinks_with_scale() {
    let n = 128;
    let d = DomainSpec::disk(n).unwrap();
    let l = d.lattice();
    let gamma = 0.5;
    let rho = TestFunction::bump(&l, Point::ORIGIN, 0.3).unwrap();
    let support = rho.support();
    let (lo_i, hi_i) = support.iter().fold((usize::MAX, 0), |(a, b), &k| (a.min(k % l.nx), b.max(k % l.nx)));
    let (lo_j, hi_j) = support.iter().fold((usize::MAX, 0), |(a, b), &k| (a.min(k / l.nx), b.max(k / l.nx)));
    let window = NodeWindow { i0: lo_i, j0: lo_j, nx: hi_i - lo_i + 1, ny: hi_j - lo_j + 1 };
    let eps = [0.125, 0.0625, 0.03125];
    let kernels: Vec<_> = eps.iter().map(|&e| make_kernel(e, KernelDim::Two, n).unwrap()).collect();
    let sampler = GffSampler::new(d).unwrap();

    // (h^ε - h, ρ) per replicate and scale.
    let errors = map_indices(ExecutionMode::default(), 100, |r| {
        let f = sampler.sample(800 + r as u64).unwrap();
        let truth = test_function_pairing(f.values(), &rho).unwrap();
        eps.iter()
            .zip(&kernels)
            .map(|(&e, k)| {
                let m = build_liouville_measure(&f, gamma, e).unwrap();
                let est = estimate_field_nodes(&m, k, gamma, window).unwrap();
                let mut full = vec![0.0; l.node_count()];
                for b in 0..window.ny {
                    for a in 0..window.nx {
                        full[l.idx(window.i0 + a, window.j0 + b)] = est.values[b * window.nx + a];
                    }
                }
                test_function_pairing(&full, &rho).unwrap() - truth
            })
            .collect::<Vec<f64>>()
    });
    let var: Vec<_> =
        (0..eps.len()).map(|k| jackknife_variance(&errors.iter().map(|e| e[k]).collect::<Vec<_>>())).collect();
    for w in var.windows(2) {
        let slack = 2.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt();
        assert!(w[1].value < w[0].value + slack, "{var:?}");
    }
    assert!(var[2].value < var[0].value, "{var:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaled_measure_shifts_estimate(seed in 0u64..1000, gamma in 0.1f64..1.9, c in -3.0f64..3.0) {
        let f = sample_gff(DomainSpec::disk(32).unwrap(), seed).unwrap();
        let mu = build_liouville_measure(&f, gamma, 0.125).unwrap();
        let k = make_kernel(0.125, KernelDim::Two, 32).unwrap();
        let probes = [Point::ORIGIN, Point::new(0.3, 0.2), Point::new(-0.5, -0.125)];
        let a = estimate_field(&mu, &k, gamma, &probes).unwrap();
        let b = estimate_field(&mu.scaled((gamma * c).exp()), &k, gamma, &probes).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((y - x - c).abs() < 1e-12);
        }
        // Renormalising the kernel by s shifts every estimate by log(s)/γ.
        let s = 1.0 + c.abs();
        let e = estimate_field(&mu, &k.scaled(s), gamma, &probes).unwrap();
        for (x, y) in a.values.iter().zip(&e.values) {
            prop_assert!((y - s.ln() / gamma - x).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_line_measure_shifts_estimate(seed in 0u64..1000, gamma in 0.1f64..1.9, c in -3.0f64..3.0) {
        let f = sample_gff(DomainSpec::upper_disk(32).unwrap(), seed).unwrap();
        let nu = build_boundary_measure(&f, gamma, 0.125).unwrap();
        let k = make_kernel(0.125, KernelDim::One, 32).unwrap();
        let probes = [-0.5, 0.0, 0.25];
        let a = boundary_estimate(&nu, &k, gamma, &probes).unwrap();
        let b = boundary_estimate(&nu.scaled((gamma * c / 2.0).exp()), &k, gamma, &probes).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((y - x - c).abs() < 1e-12);
        }
    }

    #[test]
    fn recentering_properties(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4), 2..12), c in -5.0f64..5.0) {
        let centred = recenter(&rows).unwrap();
        for k in 0..4 {
            let mean: f64 = centred.iter().map(|r| r[k]).sum::<f64>() / centred.len() as f64;
            prop_assert!(mean.abs() < 1e-12);
        }
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v + c).collect()).collect();
        let again = recenter(&shifted).unwrap();
        for (a, b) in centred.iter().flatten().zip(again.iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let twins = recenter(&[rows[0].clone(), rows[0].clone()]).unwrap();
        prop_assert!(twins.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn pairing_is_bilinear(s1 in 0u64..500, s2 in 500u64..1000) {
        let d = DomainSpec::disk(16).unwrap();
        let l = d.lattice();
        let rho = TestFunction::bump(&l, Point::new(0.1, 0.0), 0.5).unwrap();
        let f = sample_gff(d, s1).unwrap();
        let g = sample_gff(d, s2).unwrap();
        let sum = test_function_pairing(f.try_add(&g).unwrap().values(), &rho).unwrap();
        let parts = test_function_pairing(f.values(), &rho).unwrap() + test_function_pairing(g.values(), &rho).unwrap();
        prop_assert!((sum - parts).abs() < 1e-12);
    }
}
