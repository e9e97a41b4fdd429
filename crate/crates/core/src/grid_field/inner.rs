use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::domain::Shape;
use super::field::FieldGrid;

/// Dirichlet inner product `(1/2π) Σ_edges Δf Δg` over lattice edges with
/// at least one free endpoint. Each term is a product of discrete gradients
/// times the cell area, so the spacing cancels. On the upper disk, edges
/// along the free diameter count half (the natural boundary condition).
pub fn dirichlet_inner(f: &FieldGrid, g: &FieldGrid) -> Result<f64> {
    if f.domain() != g.domain() {
        return Err(Error::Shape("Dirichlet inner product of fields on different domains".into()));
    }
    let l = f.lattice();
    let diameter_row = l.shape == Shape::UpperUnitDisk;
    let mut total = 0.0;
    for j in 0..l.ny {
        for i in 0..l.nx {
            let here = l.is_free(i, j);
            if i + 1 < l.nx && (here || l.is_free(i + 1, j)) {
                let w = if diameter_row && j == 0 { 0.5 } else { 1.0 };
                total += w * (f.at(i + 1, j) - f.at(i, j)) * (g.at(i + 1, j) - g.at(i, j));
            }
            if j + 1 < l.ny && (here || l.is_free(i, j + 1)) {
                total += (f.at(i, j + 1) - f.at(i, j)) * (g.at(i, j + 1) - g.at(i, j));
            }
        }
    }
    Ok(total / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::DomainSpec;

    #[test]
    fn zero_and_symmetry() {
        let d = DomainSpec::disk(16).unwrap();
        let z = FieldGrid::zeros(d);
        assert_eq!(dirichlet_inner(&z, &z).unwrap(), 0.0);
        let f = FieldGrid::from_fn_free(d, |p| p.x * p.y + 0.3).unwrap();
        let g = FieldGrid::from_fn_free(d, |p| (4.0 * p.x).sin()).unwrap();
        assert_eq!(dirichlet_inner(&f, &g).unwrap(), dirichlet_inner(&g, &f).unwrap());
        assert!(dirichlet_inner(&f, &f).unwrap() > 0.0);
        let other = FieldGrid::zeros(DomainSpec::disk(32).unwrap());
        assert!(dirichlet_inner(&f, &other).is_err());
    }
}
