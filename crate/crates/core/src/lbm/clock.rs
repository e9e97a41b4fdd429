use crate::error::{Error, Result};
use crate::gmc_measure::{check_gamma, dyadic_level};
use crate::grid_field::{circle_average, FieldGrid, Lattice, Point};

use super::path::BrownianPath;

/// The quantum clock `φ` at the path's timestamps, with the per-step
/// increments it was summed from.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumClock {
    pub eps: f64,
    pub gamma: f64,
    phi: Vec<f64>,
    increments: Vec<f64>,
}

impl QuantumClock {
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `Δφ_j`, the clock mass of step `j`.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `φ(τ)`.
    pub fn total(&self) -> f64 {
        *self.phi.last().expect("clocks are never empty")
    }
}

/// Clock from precomputed circle averages `h_ε(B_{t_j})`, one per step's
/// left endpoint: `φ(t_k) = Σ_{j<k} ε^{γ²/2} e^{γ h_ε(B_{t_j})} (t_{j+1} - t_j)`.
pub fn quantum_clock_from_averages(path: &BrownianPath, averages: &[f64], gamma: f64, eps: f64) -> Result<QuantumClock> {
    check_gamma(gamma)?;
    if averages.len() != path.steps().len() {
        return Err(Error::Shape(format!(
            "{} circle averages for a path with {} steps",
            averages.len(),
            path.steps().len()
        )));
    }
    let scale = eps.powf(gamma * gamma / 2.0);
    let increments: Vec<f64> = averages
        .iter()
        .zip(path.steps())
        .map(|(h, dt)| scale * (gamma * h).exp() * dt)
        .collect();
    let mut phi = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    phi.push(acc);
    for d in &increments {
        acc += d;
        phi.push(acc);
    }
    Ok(QuantumClock { eps, gamma, phi, increments })
}

/// The quantum clock of `path` in `field` at scale `eps`.
pub fn quantum_clock(path: &BrownianPath, field: &FieldGrid, gamma: f64, eps: f64) -> Result<QuantumClock> {
    check_gamma(gamma)?;
    dyadic_level(eps, field.lattice().n)?;
    let pos = path.positions();
    let averages = pos[..pos.len() - 1]
        .iter()
        .map(|p| circle_average(field, *p, eps))
        .collect::<Result<Vec<f64>>>()?;
    quantum_clock_from_averages(path, &averages, gamma, eps)
}

/// Liouville Brownian motion: the path's positions indexed by quantum time.
#[derive(Debug, Clone, PartialEq)]
pub struct LbmTrajectory {
    quantum_times: Vec<f64>,
    euclidean_times: Vec<f64>,
    positions: Vec<Point>,
}

/// `Z_t = B_{φ⁻¹(t)}`. The positions are those of the path, so both have
/// the same range.
pub fn lbm_trajectory(path: &BrownianPath, clock: &QuantumClock) -> Result<LbmTrajectory> {
    if clock.phi().len() != path.len() {
        return Err(Error::Config(format!(
            "clock has {} timestamps but the path has {}",
            clock.phi().len(),
            path.len()
        )));
    }
    Ok(LbmTrajectory {
        quantum_times: clock.phi().to_vec(),
        euclidean_times: path.times().to_vec(),
        positions: path.positions().to_vec(),
    })
}

impl LbmTrajectory {
    pub fn quantum_times(&self) -> &[f64] {
        &self.quantum_times
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Index of the first timestamp with `φ >= t` (the left-continuous
    /// inverse), clamped to the last one.
    fn inverse_index(&self, t: f64) -> usize {
        self.quantum_times.partition_point(|&p| p < t).min(self.quantum_times.len() - 1)
    }

    /// `φ⁻¹(t)` on the discrete timestamps.
    pub fn inverse_clock(&self, t: f64) -> f64 {
        self.euclidean_times[self.inverse_index(t)]
    }

    /// `Z_t`.
    pub fn at(&self, t: f64) -> Point {
        self.positions[self.inverse_index(t)]
    }

    /// `Z` on a grid of quantum times.
    pub fn sample(&self, times: &[f64]) -> Vec<Point> {
        times.iter().map(|&t| self.at(t)).collect()
    }

    /// Per-coordinate quadratic variation `Σ |ΔZ|² / 2` over a grid of
    /// quantum times; it tracks `φ⁻¹` of the last grid time.
    pub fn quadratic_variation(&self, times: &[f64]) -> f64 {
        let z = self.sample(times);
        z.windows(2).map(|w| {
            let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
            dx * dx + dy * dy
        }).sum::<f64>() / 2.0
    }
}

/// Clock mass `Σ_j 1{B_{t_j} ∈ B(center, radius)} Δφ_j` of a ball window.
pub fn occupation_quantum_measure(path: &BrownianPath, clock: &QuantumClock, center: Point, radius: f64) -> Result<f64> {
    if clock.increments().len() != path.steps().len() {
        return Err(Error::Config("clock does not belong to the path".into()));
    }
    if !(radius > 0.0) || center.norm() + radius > 1.0 + 1e-12 {
        return Err(Error::Domain("occupation window must lie in the unit disk".into()));
    }
    let r2 = radius * radius;
    Ok(path.positions()[..path.steps().len()]
        .iter()
        .zip(clock.increments())
        .filter(|(p, _)| {
            let (dx, dy) = (p.x - center.x, p.y - center.y);
            dx * dx + dy * dy < r2
        })
        .map(|(_, d)| d)
        .sum())
}

/// Clock mass per lattice cell (row-major over cells): a partition of the
/// total `φ(τ)`.
pub fn occupation_by_cells(path: &BrownianPath, clock: &QuantumClock, lattice: &Lattice) -> Vec<f64> {
    let mut out = vec![0.0; lattice.cells_x() * lattice.cells_y()];
    for (p, d) in path.positions().iter().zip(clock.increments()) {
        let (u, v) = lattice.to_grid(*p);
        let ci = (u.floor().max(0.0) as usize).min(lattice.cells_x() - 1);
        let cj = (v.floor().max(0.0) as usize).min(lattice.cells_y() - 1);
        out[cj * lattice.cells_x() + ci] += d;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::{sample_gff, DomainSpec};
    use crate::lbm::{default_dt, sample_brownian_path};

    #[test]
    fn gamma_zero_clock_is_identity() {
        let d = DomainSpec::disk(32).unwrap();
        let path = sample_brownian_path(&d, default_dt(32), 1).unwrap();
        let f = sample_gff(d, 1).unwrap();
        let c = quantum_clock(&path, &f, 0.0, 0.125).unwrap();
        assert_eq!(c.phi(), path.times());
        let z = lbm_trajectory(&path, &c).unwrap();
        assert_eq!(z.positions(), path.positions());
        let t = path.times()[17];
        assert_eq!(z.inverse_clock(t), t);
    }

    #[test]
    fn clock_is_monotone_and_additive() {
        let d = DomainSpec::disk(32).unwrap();
        let path = sample_brownian_path(&d, default_dt(32), 2).unwrap();
        let f = sample_gff(d, 2).unwrap();
        let c = quantum_clock(&path, &f, 0.7, 0.125).unwrap();
        assert_eq!(c.phi()[0], 0.0);
        assert!(c.phi().windows(2).all(|w| w[1] >= w[0]));
        let cells = occupation_by_cells(&path, &c, f.lattice());
        assert!((cells.iter().sum::<f64>() - c.total()).abs() < 1e-12 * c.total());
        assert_eq!(occupation_quantum_measure(&path, &c, Point::new(0.8, 0.0), 0.1).unwrap(), 0.0);
        let whole = occupation_quantum_measure(&path, &c, Point::ORIGIN, 0.6).unwrap();
        assert!((whole - c.total()).abs() < 1e-12 * c.total());
    }
}
