use crate::error::{Error, Result};
use crate::fft::{correlate_direct, Correlator, GridRef, Window};
use crate::gmc_measure::{CellMeasure, LineMeasure};
use crate::grid_field::Point;

use super::kernel::{Kernel, KernelDim};

const FFT_THRESHOLD: usize = 1024;

/// Per-probe estimates. Probes whose kernel window carries no mass hold
/// `-∞` and are counted in `degenerate`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEstimates {
    pub values: Vec<f64>,
    pub degenerate: usize,
}

impl ProbeEstimates {
    fn from_sums(sums: impl IntoIterator<Item = f64>, scale: f64) -> Self {
        let mut degenerate = 0;
        let values = sums
            .into_iter()
            .map(|s| {
                if s > 0.0 {
                    s.ln() * scale
                } else {
                    degenerate += 1;
                    f64::NEG_INFINITY
                }
            })
            .collect();
        ProbeEstimates { values, degenerate }
    }
}

/// A rectangle of lattice nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeWindow {
    pub i0: usize,
    pub j0: usize,
    pub nx: usize,
    pub ny: usize,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::Parameter(format!("the estimator is undefined at gamma = {gamma}")));
    }
    Ok(())
}

fn check_kernel(kernel: &Kernel, dim: KernelDim, n: u32) -> Result<()> {
    if kernel.dim() != dim {
        return Err(Error::Config("kernel dimension does not match the measure".into()));
    }
    if kernel.resolution() != n {
        return Err(Error::Config(format!(
            "kernel built for resolution {} but the measure has {n}",
            kernel.resolution()
        )));
    }
    Ok(())
}

/// `h^ε(x) = (1/γ) log Σ_cells η^ε(x - z_cell) μ(cell)` at each probe, by
/// direct summation.
pub fn estimate_field(
    measure: &CellMeasure,
    kernel: &Kernel,
    gamma: f64,
    probes: &[Point],
) -> Result<ProbeEstimates> {
    check_gamma(gamma)?;
    let l = measure.lattice();
    check_kernel(kernel, KernelDim::Two, l.n)?;
    let eps = kernel.eps();
    let mut sums = Vec::with_capacity(probes.len());
    for p in probes {
        if !l.contains(*p) || l.boundary_distance(*p) <= eps {
            return Err(Error::Domain(format!(
                "probe ({}, {}) is within {eps} of the boundary",
                p.x, p.y
            )));
        }
        let lo_i = (((p.x - eps - l.x0) / l.h - 0.5).floor().max(0.0)) as usize;
        let hi_i = ((((p.x + eps - l.x0) / l.h - 0.5).ceil()) as usize).min(l.cells_x() - 1);
        let lo_j = (((p.y - eps - l.y0) / l.h - 0.5).floor().max(0.0)) as usize;
        let hi_j = ((((p.y + eps - l.y0) / l.h - 0.5).ceil()) as usize).min(l.cells_y() - 1);
        let mut s = 0.0;
        for cj in lo_j..=hi_j {
            for ci in lo_i..=hi_i {
                let c = l.cell_center(ci, cj);
                let w = kernel.density(c.x - p.x, c.y - p.y);
                if w > 0.0 {
                    s += w * measure.mass(ci, cj);
                }
            }
        }
        sums.push(s);
    }
    Ok(ProbeEstimates::from_sums(sums, 1.0 / gamma))
}

/// The estimator at every node of `window` (row-major), through the
/// kernel's node-to-cell stencil. Uses FFTs on large windows.
pub fn estimate_field_nodes(
    measure: &CellMeasure,
    kernel: &Kernel,
    gamma: f64,
    window: NodeWindow,
) -> Result<ProbeEstimates> {
    check_gamma(gamma)?;
    let l = measure.lattice();
    check_kernel(kernel, KernelDim::Two, l.n)?;
    let eps = kernel.eps();
    if window.i0 + window.nx > l.nx || window.j0 + window.ny > l.ny {
        return Err(Error::Shape("node window exceeds the lattice".into()));
    }
    for (i, j) in [
        (window.i0, window.j0),
        (window.i0 + window.nx.saturating_sub(1), window.j0),
        (window.i0, window.j0 + window.ny.saturating_sub(1)),
        (window.i0 + window.nx.saturating_sub(1), window.j0 + window.ny.saturating_sub(1)),
    ] {
        let p = l.node_pos(i, j);
        if !l.contains(p) || l.boundary_distance(p) <= eps {
            return Err(Error::Domain("node window reaches within eps of the boundary".into()));
        }
    }
    let grid = GridRef { data: measure.masses(), nx: l.cells_x(), ny: l.cells_y() };
    let out = Window { x0: window.i0 as i64, y0: window.j0 as i64, nx: window.nx, ny: window.ny };
    let sums = if window.nx * window.ny > FFT_THRESHOLD {
        Correlator::new().correlate(grid, kernel.stencil(), out)
    } else {
        correlate_direct(grid, kernel.stencil(), out)
    };
    // FFT rounding can leave tiny negative sums where the true sum is zero.
    let floor = 1e-13 * sums.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ProbeEstimates::from_sums(
        sums.into_iter().map(|s| if s.abs() <= floor { 0.0 } else { s }),
        1.0 / gamma,
    ))
}

/// `h^ε(x) = (2/γ) log Σ_bins η^ε(x - x_bin) ν(bin)` for probes on the
/// diameter.
pub fn boundary_estimate(
    measure: &LineMeasure,
    kernel: &Kernel,
    gamma: f64,
    probes: &[f64],
) -> Result<ProbeEstimates> {
    check_gamma(gamma)?;
    check_kernel(kernel, KernelDim::One, measure.resolution())?;
    let eps = kernel.eps();
    let sums = probes
        .iter()
        .map(|&x| {
            if !(x.abs() + eps < 1.0) {
                return Err(Error::Domain(format!("probe {x} is within {eps} of the arc")));
            }
            Ok((0..measure.bins())
                .map(|k| {
                    let w = kernel.density(measure.bin_center(k) - x, 0.0);
                    if w > 0.0 {
                        w * measure.masses()[k]
                    } else {
                        0.0
                    }
                })
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ProbeEstimates::from_sums(sums, 2.0 / gamma))
}

/// Subtracts the cross-replicate mean at every probe. `estimates[r][p]` is
/// replicate `r` at probe `p`.
pub fn recenter(estimates: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if estimates.len() < 2 {
        return Err(Error::Precondition("centering needs at least two replicates".into()));
    }
    let p = estimates[0].len();
    if estimates.iter().any(|r| r.len() != p) {
        return Err(Error::Shape("replicates have different probe counts".into()));
    }
    let n = estimates.len() as f64;
    let means: Vec<f64> =
        (0..p).map(|k| estimates.iter().map(|r| r[k]).sum::<f64>() / n).collect();
    Ok(estimates.iter().map(|r| r.iter().zip(&means).map(|(v, m)| v - m).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmc_measure::{build_boundary_measure, build_liouville_measure};
    use crate::grid_field::{sample_gff, DomainSpec, FieldGrid};
    use crate::reconstruct::make_kernel;

    #[test]
    fn lebesgue_measure_gives_zero() {
        let d = DomainSpec::square(32).unwrap();
        let f = FieldGrid::zeros(d);
        let gamma = 0.8;
        let m = build_liouville_measure(&f, gamma, 0.125).unwrap();
        let m = m.scaled(0.125f64.powf(-gamma * gamma / 2.0));
        let k = make_kernel(0.125, KernelDim::Two, 32).unwrap();
        let est = estimate_field(&m, &k, gamma, &[Point::new(0.5, 0.5), Point::new(0.25, 0.75)]).unwrap();
        assert!(est.values.iter().all(|v| v.abs() < 1e-12));
        assert!(estimate_field(&m, &k, 0.0, &[Point::new(0.5, 0.5)]).is_err());
        assert!(estimate_field(&m, &k, gamma, &[Point::new(0.1, 0.5)]).is_err());
    }

    #[test]
    fn node_window_matches_probes() {
        let d = DomainSpec::disk(64).unwrap();
        let f = sample_gff(d, 11).unwrap();
        let m = build_liouville_measure(&f, 0.5, 0.0625).unwrap();
        let k = make_kernel(0.0625, KernelDim::Two, 64).unwrap();
        let w = NodeWindow { i0: 40, j0: 44, nx: 40, ny: 36 };
        let grid = estimate_field_nodes(&m, &k, 0.5, w).unwrap();
        let l = m.lattice();
        for &(i, j) in &[(40, 44), (63, 60), (79, 79)] {
            let p = l.node_pos(i, j);
            let e = estimate_field(&m, &k, 0.5, &[p]).unwrap().values[0];
            assert!((grid.values[(j - w.j0) * w.nx + i - w.i0] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_estimate_of_length_is_zero() {
        let d = DomainSpec::upper_disk(32).unwrap();
        let f = FieldGrid::zeros(d);
        let m = build_boundary_measure(&f, 0.0, 0.125).unwrap();
        let k = make_kernel(0.125, KernelDim::One, 32).unwrap();
        let e = boundary_estimate(&m, &k, 0.7, &[0.0, 0.5, -0.8125]).unwrap();
        assert!(e.values.iter().all(|v| v.abs() < 1e-12));
        assert!(boundary_estimate(&m, &k, 0.7, &[0.9]).is_err());
    }

    #[test]
    fn recentering() {
        let a = vec![vec![1.0, 2.0], vec![1.0, 2.0]];
        assert!(recenter(&a).unwrap().iter().flatten().all(|&v| v == 0.0));
        assert!(recenter(&a[..1]).is_err());
        let b = vec![vec![0.3, 5.0], vec![1.1, -2.0], vec![0.7, 0.1]];
        let c = recenter(&b).unwrap();
        for p in 0..2 {
            assert!(c.iter().map(|r| r[p]).sum::<f64>().abs() < 1e-12);
        }
    }
}
