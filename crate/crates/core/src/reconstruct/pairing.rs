use crate::error::{Error, Result};
use crate::grid_field::{Lattice, Point};

use super::kernel::bump_profile;

/// A test function sampled at lattice nodes (2D) or at the nodes of the
/// free diameter (1D), with the quadrature weight of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    values: Vec<f64>,
    weight: f64,
}

impl TestFunction {
    /// Node values on `lattice`. Fails if the function is nonzero within one
    /// lattice spacing of the boundary.
    pub fn from_values(lattice: &Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.node_count() {
            return Err(Error::Shape("test function does not match the lattice".into()));
        }
        for j in 0..lattice.ny {
            for i in 0..lattice.nx {
                let v = values[lattice.idx(i, j)];
                let p = lattice.node_pos(i, j);
                if v != 0.0 && (!lattice.contains(p) || lattice.boundary_distance(p) <= lattice.h) {
                    return Err(Error::Precondition(format!(
                        "test function support touches the boundary at ({}, {})",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(TestFunction { values, weight: lattice.cell_area() })
    }

    /// Smooth radial bump of radius `radius` around `center`, normalised to
    /// unit integral on the lattice.
    pub fn bump(lattice: &Lattice, center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !lattice.contains(center) || lattice.boundary_distance(center) <= radius {
            return Err(Error::Precondition("bump support must lie inside the domain".into()));
        }
        let mut values = vec![0.0; lattice.node_count()];
        for j in 0..lattice.ny {
            for i in 0..lattice.nx {
                values[lattice.idx(i, j)] = bump_profile(lattice.node_pos(i, j).dist(center) / radius);
            }
        }
        let total: f64 = values.iter().sum::<f64>() * lattice.cell_area();
        values.iter_mut().for_each(|v| *v /= total);
        Self::from_values(lattice, values)
    }

    /// Smooth bump on the diameter nodes `x_i = -1 + i/n`, `i = 0..=2n`,
    /// normalised to unit integral.
    pub fn bump_on_diameter(n: u32, center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && center.abs() + radius < 1.0) {
            return Err(Error::Precondition("bump support must lie inside (-1, 1)".into()));
        }
        let h = 1.0 / n as f64;
        let mut values: Vec<f64> = (0..=2 * n as usize)
            .map(|i| bump_profile((-1.0 + i as f64 * h - center) / radius))
            .collect();
        let total: f64 = values.iter().sum::<f64>() * h;
        values.iter_mut().for_each(|v| *v /= total);
        Ok(TestFunction { values, weight: h })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Indices of the samples where the function is nonzero.
    pub fn support(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(k, _)| k).collect()
    }
}

/// Discrete pairing `Σ values · ρ · (cell area or bin length)`. Samples
/// outside the support of `ρ` are ignored, so values there may be
/// undefined.
pub fn test_function_pairing(values: &[f64], rho: &TestFunction) -> Result<f64> {
    if values.len() != rho.values.len() {
        return Err(Error::Shape(format!(
            "{} values for a test function with {} samples",
            values.len(),
            rho.values.len()
        )));
    }
    Ok(values
        .iter()
        .zip(&rho.values)
        .filter(|(_, r)| **r != 0.0)
        .map(|(v, r)| v * r)
        .sum::<f64>()
        * rho.weight)
}
