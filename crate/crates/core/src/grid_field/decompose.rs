//! Markov decomposition of a field inside a ball.

use crate::error::{Error, Result};

use super::circle::circle_offsets;
use super::domain::{Lattice, Point};
use super::field::FieldGrid;
use super::multigrid::Multigrid;

const SOLVE_TOL: f64 = 1e-13;

/// Precomputed solver for the discrete Dirichlet problem in the lattice
/// nodes of an open ball. Reusable across replicates on one lattice.
#[derive(Debug, Clone)]
pub struct BallDecomposition {
    lattice: Lattice,
    center: Point,
    radius: f64,
    side: usize,
    mg: Multigrid,
}

impl BallDecomposition {
    /// Requires the closed ball to lie strictly inside the domain.
    pub fn new(lattice: Lattice, center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !lattice.contains(center) || lattice.boundary_distance(center) <= radius {
            return Err(Error::Domain(format!(
                "ball of radius {radius} around ({}, {}) is not strictly inside the domain",
                center.x, center.y
            )));
        }
        let widest = lattice.nx.max(lattice.ny);
        let side = if (widest - 1).is_power_of_two() {
            widest
        } else {
            (widest - 1).next_power_of_two() + 1
        };
        let mut mask = vec![false; side * side];
        for j in 0..lattice.ny {
            for i in 0..lattice.nx {
                mask[j * side + i] = lattice.node_pos(i, j).dist(center) < radius;
            }
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::Domain("ball contains no lattice node".into()));
        }
        let mg = Multigrid::new(side, mask)?;
        Ok(BallDecomposition { lattice, center, radius, side, mg })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Whether node `(i, j)` is one of the ball's interior nodes.
    pub fn in_ball(&self, i: usize, j: usize) -> bool {
        self.mg.mask()[j * self.side + i]
    }

    /// `(support_part, harmonic_part)` with `field = support + harmonic`.
    pub fn decompose(&self, field: &FieldGrid) -> Result<(FieldGrid, FieldGrid)> {
        if *field.lattice() != self.lattice {
            return Err(Error::Shape("field lattice does not match the decomposition".into()));
        }
        let l = &self.lattice;
        let s = self.side;
        let mask = self.mg.mask();
        // The support part solves K s = K f inside the ball with zero data
        // outside; the harmonic part is the remainder.
        let mut b = vec![0.0; s * s];
        for j in 0..l.ny {
            for i in 0..l.nx {
                if mask[j * s + i] {
                    b[j * s + i] = 4.0 * field.at(i, j)
                        - field.at(i - 1, j)
                        - field.at(i + 1, j)
                        - field.at(i, j - 1)
                        - field.at(i, j + 1);
                }
            }
        }
        let u = self.mg.solve(&b, SOLVE_TOL)?;
        let mut support = vec![0.0; l.node_count()];
        for j in 0..l.ny {
            for i in 0..l.nx {
                if mask[j * s + i] {
                    support[l.idx(i, j)] = u[j * s + i];
                }
            }
        }
        let support = FieldGrid::from_values(*field.domain(), support)?
            .with_seed(field.seed())
            .with_gamma(field.gamma());
        let harmonic = field.try_sub(&support)?;
        Ok((support, harmonic))
    }

    /// Oscillation `max - min` of the harmonic part over the circle of
    /// radius `eps` around the centre (the maximum principle places the
    /// extremes of a harmonic function on the circle).
    pub fn oscillation(&self, harmonic: &FieldGrid, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < self.radius / 4.0) {
            return Err(Error::Precondition(format!(
                "scale {eps} must be positive and below r/4 = {}",
                self.radius / 4.0
            )));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let c = self.center;
        for o in circle_offsets(eps, self.lattice.n) {
            let v = harmonic.interpolate(Point::new(c.x + o.x, c.y + o.y));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(hi - lo)
    }
}

/// Splits `field` in the ball `B_r(z)` into a zero-boundary part supported
/// in the ball and a part that is discrete-harmonic there.
pub fn harmonic_decompose(field: &FieldGrid, z: Point, r: f64) -> Result<(FieldGrid, FieldGrid)> {
    BallDecomposition::new(*field.lattice(), z, r)?.decompose(field)
}

/// Oscillation over `B_ε(z)` of the harmonic part of `field` in `B_r(z)`.
pub fn harmonic_oscillation(field: &FieldGrid, z: Point, r: f64, eps: f64) -> Result<f64> {
    if !(eps < r / 4.0) {
        return Err(Error::Precondition(format!("scale {eps} must be below r/4 = {}", r / 4.0)));
    }
    let dec = BallDecomposition::new(*field.lattice(), z, r)?;
    let (_, harmonic) = dec.decompose(field)?;
    dec.oscillation(&harmonic, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::{sample_gff, DomainSpec};

    #[test]
    fn sum_identity_and_projection() {
        let d = DomainSpec::square(32).unwrap();
        let f = sample_gff(d, 3).unwrap();
        let z = Point::new(0.5, 0.5);
        let (s, h) = harmonic_decompose(&f, z, 0.25).unwrap();
        for k in 0..f.values().len() {
            assert!((s.values()[k] + h.values()[k] - f.values()[k]).abs() < 1e-14);
        }
        let l = f.lattice();
        for j in 0..l.ny {
            for i in 0..l.nx {
                if l.node_pos(i, j).dist(z) >= 0.25 {
                    assert_eq!(s.at(i, j), 0.0);
                }
            }
        }
        let (s2, h2) = harmonic_decompose(&h, z, 0.25).unwrap();
        assert!(s2.values().iter().all(|v| v.abs() < 1e-9));
        for (a, b) in h.values().iter().zip(h2.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_field_is_harmonic() {
        let d = DomainSpec::disk(16).unwrap();
        let f = FieldGrid::from_fn(d, |p| 1.0 + 2.0 * p.x - p.y).unwrap();
        let (s, _) = harmonic_decompose(&f, Point::new(0.1, 0.0), 0.5).unwrap();
        assert!(s.values().iter().all(|v| v.abs() < 1e-9));
        assert!(harmonic_decompose(&f, Point::new(0.6, 0.0), 0.5).is_err());
    }

    #[test]
    fn oscillation_preconditions() {
        let d = DomainSpec::square(32).unwrap();
        let f = FieldGrid::zeros(d).shifted(1.0);
        let z = Point::new(0.5, 0.5);
        assert_eq!(harmonic_oscillation(&f, z, 0.25, 1.0 / 32.0).unwrap(), 0.0);
        assert!(harmonic_oscillation(&f, z, 0.25, 0.0625).is_err());
    }
}
