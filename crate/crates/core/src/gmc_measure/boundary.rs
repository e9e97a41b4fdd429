use crate::error::{Error, Result};
use crate::grid_field::{
    semicircle_average, truncated_semicircle_average, BoundaryCondition, FieldGrid, Shape,
};

use super::{check_gamma, dyadic_level};

/// Quantum length per bin of the free diameter `[-1, 1]`, split into `2n`
/// bins of length `1/n` (one per lattice edge).
#[derive(Debug, Clone, PartialEq)]
pub struct LineMeasure {
    n: u32,
    eps: f64,
    gamma: f64,
    mass: Vec<f64>,
}

impl LineMeasure {
    pub fn from_masses(n: u32, eps: f64, gamma: f64, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != 2 * n as usize {
            return Err(Error::Shape(format!("expected {} bins, got {}", 2 * n, mass.len())));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Input("bin masses must be finite and nonnegative".into()));
        }
        Ok(LineMeasure { n, eps, gamma, mass })
    }

    pub fn resolution(&self) -> u32 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn bin_length(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        -1.0 + (k as f64 + 0.5) / self.n as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> LineMeasure {
        let mut out = self.clone();
        out.mass.iter_mut().for_each(|m| *m *= factor);
        out
    }
}

/// Upper-semicircle averages of `field` at the bin centres of the
/// diameter, truncated to the disk near `±1`.
pub fn diameter_averages(field: &FieldGrid, eps: f64) -> Result<Vec<f64>> {
    let n = field.lattice().n;
    (0..2 * n as usize)
        .map(|k| {
            let x = -1.0 + (k as f64 + 0.5) / n as f64;
            if x.abs() + eps <= 1.0 {
                semicircle_average(field, x, eps)
            } else {
                truncated_semicircle_average(field, x, eps)
            }
        })
        .collect()
}

/// Boundary measure `ε^{γ²/4} e^{γ h_ε(x)/2} dx` on the free diameter,
/// with `h_ε` the upper-semicircle average.
pub fn build_boundary_measure(field: &FieldGrid, gamma: f64, eps: f64) -> Result<LineMeasure> {
    let d = field.domain();
    if d.shape() != Shape::UpperUnitDisk || d.boundary() != BoundaryCondition::MixedDirichletNeumann {
        return Err(Error::Config(
            "the boundary measure needs a mixed-boundary field on the upper disk".into(),
        ));
    }
    check_gamma(gamma)?;
    let n = d.resolution();
    dyadic_level(eps, n)?;
    let factor = eps.powf(gamma * gamma / 4.0) / n as f64;
    let mass = diameter_averages(field, eps)?
        .into_iter()
        .map(|h| factor * (gamma * h / 2.0).exp())
        .collect();
    LineMeasure::from_masses(n, eps, gamma, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::{sample_gff, DomainSpec};

    #[test]
    fn lebesgue_and_shift() {
        let d = DomainSpec::upper_disk(32).unwrap();
        let f = sample_gff(d, 3).unwrap();
        let m0 = build_boundary_measure(&f, 0.0, 0.125).unwrap();
        assert!(m0.masses().iter().all(|&m| m == 1.0 / 32.0));
        let m = build_boundary_measure(&f, 0.8, 0.125).unwrap();
        let ms = build_boundary_measure(&f.shifted(0.7), 0.8, 0.125).unwrap();
        let k = (0.8f64 * 0.7 / 2.0).exp();
        for (a, b) in m.masses().iter().zip(ms.masses()) {
            assert!((a * k - b).abs() <= 1e-13 * b);
        }
        let disk = FieldGrid::zeros(DomainSpec::disk(32).unwrap());
        assert!(build_boundary_measure(&disk, 0.5, 0.125).is_err());
    }
}
