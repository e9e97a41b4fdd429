use crate::error::{Error, Result};
use crate::grid_field::Point;

use super::{CellMeasure, LineMeasure};

/// Measures represented as weighted points.
pub trait MassAtoms {
    /// `(location, mass)` for every atom with positive mass.
    fn atoms(&self) -> Vec<(Point, f64)>;
}

impl MassAtoms for CellMeasure {
    fn atoms(&self) -> Vec<(Point, f64)> {
        let l = self.lattice();
        let mut out = Vec::new();
        for cj in 0..l.cells_y() {
            for ci in 0..l.cells_x() {
                let m = self.mass(ci, cj);
                if m > 0.0 {
                    out.push((l.cell_center(ci, cj), m));
                }
            }
        }
        out
    }
}

impl MassAtoms for LineMeasure {
    fn atoms(&self) -> Vec<(Point, f64)> {
        self.masses()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(k, &m)| (Point::new(self.bin_center(k), 0.0), m))
            .collect()
    }
}

/// Regularised energy `Σ_a Σ_b m_a m_b / max(|z_a - z_b|, δ)^{d - δ}` with
/// `δ = epsilon_reg`, over all ordered pairs including `a = b`.
pub fn frostman_energy(measure: &impl MassAtoms, d: f64, epsilon_reg: f64) -> Result<f64> {
    if !(d > 0.0 && d <= 2.0) {
        return Err(Error::Parameter(format!("dimension {d} outside (0, 2]")));
    }
    if !(epsilon_reg > 0.0 && epsilon_reg.is_finite()) {
        return Err(Error::Parameter(format!("regularisation {epsilon_reg} is not positive")));
    }
    let atoms = measure.atoms();
    let s = d - epsilon_reg;
    let floor = epsilon_reg * epsilon_reg;
    let mut total = 0.0;
    for (za, ma) in &atoms {
        let mut row = 0.0;
        for (zb, mb) in &atoms {
            let (dx, dy) = (za.x - zb.x, za.y - zb.y);
            let r2 = (dx * dx + dy * dy).max(floor);
            row += mb * r2.powf(-s / 2.0);
        }
        total += ma * row;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::DomainSpec;

    #[test]
    fn single_atom_and_bilinearity() {
        let d = DomainSpec::square(8).unwrap();
        let l = d.lattice();
        let mut mass = vec![0.0; l.cells_x() * l.cells_y()];
        mass[10] = 0.3;
        let m = CellMeasure::from_masses(d, 0.25, 1.0, mass).unwrap();
        let e = frostman_energy(&m, 1.5, 0.01).unwrap();
        assert!((e - 0.09 / 0.01f64.powf(1.49)).abs() < 1e-12 * e);
        let lm = LineMeasure::from_masses(8, 0.25, 1.0, (0..16).map(|k| k as f64 * 0.1).collect()).unwrap();
        let e1 = frostman_energy(&lm, 1.0, 0.05).unwrap();
        let e2 = frostman_energy(&lm.scaled(2.0), 1.0, 0.05).unwrap();
        assert!((e2 - 4.0 * e1).abs() < 1e-12 * e2);
        assert!(frostman_energy(&lm, 0.0, 0.05).is_err());
    }
}
