use crate::error::{Error, Result};
use crate::fft::{correlate_direct, Correlator, GridRef, Window};
use crate::grid_field::{
    ball_inside, circle_stencil, truncated_circle_average, BoundaryCondition, DomainSpec,
    FieldGrid, Lattice, Point,
};

use super::{check_gamma, dyadic_level};

/// Above this many interior cells the circle averages go through FFTs.
const FFT_THRESHOLD: usize = 4096;

/// A rectangle of cells: `ci0 <= ci < ci0 + ncx`, likewise in `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRegion {
    pub ci0: usize,
    pub cj0: usize,
    pub ncx: usize,
    pub ncy: usize,
}

impl CellRegion {
    pub fn all(lattice: &Lattice) -> Self {
        CellRegion { ci0: 0, cj0: 0, ncx: lattice.cells_x(), ncy: lattice.cells_y() }
    }

    /// Cells whose centres lie in the axis-aligned box `[lo, hi]²`.
    pub fn covering_box(lattice: &Lattice, lo: Point, hi: Point) -> Self {
        let to_cell = |v: f64, o: f64| (v - o) / lattice.h - 0.5;
        let i0 = to_cell(lo.x, lattice.x0).ceil().max(0.0) as usize;
        let j0 = to_cell(lo.y, lattice.y0).ceil().max(0.0) as usize;
        let i1 = (to_cell(hi.x, lattice.x0).floor() as usize).min(lattice.cells_x() - 1);
        let j1 = (to_cell(hi.y, lattice.y0).floor() as usize).min(lattice.cells_y() - 1);
        CellRegion { ci0: i0, cj0: j0, ncx: (i1 + 1).saturating_sub(i0), ncy: (j1 + 1).saturating_sub(j0) }
    }

    pub fn contains(&self, ci: usize, cj: usize) -> bool {
        ci >= self.ci0 && cj >= self.cj0 && ci < self.ci0 + self.ncx && cj < self.cj0 + self.ncy
    }
}

/// Quantum area per lattice cell at regularisation scale `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMeasure {
    domain: DomainSpec,
    lattice: Lattice,
    eps: f64,
    gamma: f64,
    mass: Vec<f64>,
}

impl CellMeasure {
    /// Wraps per-cell masses (row-major over the lattice cells).
    pub fn from_masses(domain: DomainSpec, eps: f64, gamma: f64, mass: Vec<f64>) -> Result<Self> {
        let lattice = domain.lattice();
        if mass.len() != lattice.cells_x() * lattice.cells_y() {
            return Err(Error::Shape(format!(
                "expected {} cell masses, got {}",
                lattice.cells_x() * lattice.cells_y(),
                mass.len()
            )));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Input("cell masses must be finite and nonnegative".into()));
        }
        Ok(CellMeasure { domain, lattice, eps, gamma, mass })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
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

    pub fn cells_x(&self) -> usize {
        self.lattice.cells_x()
    }

    pub fn cells_y(&self) -> usize {
        self.lattice.cells_y()
    }

    #[inline]
    pub fn mass(&self, ci: usize, cj: usize) -> f64 {
        self.mass[cj * self.lattice.cells_x() + ci]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// The measure multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> CellMeasure {
        let mut out = self.clone();
        out.mass.iter_mut().for_each(|m| *m *= factor);
        out
    }
}

/// Circle averages `h_ε` at the centres of the cells in `region`
/// (row-major over the region). Cells whose centre is outside the domain
/// get `NaN`; cells whose circle leaves the domain use the truncated
/// circle.
pub fn cell_circle_averages(field: &FieldGrid, eps: f64, region: CellRegion) -> Result<Vec<f64>> {
    let l = *field.lattice();
    if region.ncx == 0 || region.ncy == 0 {
        return Ok(Vec::new());
    }
    if region.ci0 + region.ncx > l.cells_x() || region.cj0 + region.ncy > l.cells_y() {
        return Err(Error::Shape("cell region exceeds the lattice".into()));
    }
    let stencil = circle_stencil(eps, l.n, (0.5, 0.5));
    let window = Window { x0: region.ci0 as i64, y0: region.cj0 as i64, nx: region.ncx, ny: region.ncy };
    let grid = GridRef { data: field.values(), nx: l.nx, ny: l.ny };
    let bulk = if region.ncx * region.ncy > FFT_THRESHOLD {
        Correlator::new().correlate(grid, &stencil, window)
    } else {
        correlate_direct(grid, &stencil, window)
    };
    let mut out = vec![f64::NAN; region.ncx * region.ncy];
    for b in 0..region.ncy {
        for a in 0..region.ncx {
            let (ci, cj) = (region.ci0 + a, region.cj0 + b);
            let c = l.cell_center(ci, cj);
            if !l.contains(c) {
                continue;
            }
            out[b * region.ncx + a] = if ball_inside(&l, c, eps) {
                bulk[b * region.ncx + a]
            } else {
                truncated_circle_average(field, c, eps)?
            };
        }
    }
    Ok(out)
}

/// Liouville measure `ε^{γ²/2} e^{γ h_ε(z)} dz` per cell, on every cell of
/// the domain.
pub fn build_liouville_measure(field: &FieldGrid, gamma: f64, eps: f64) -> Result<CellMeasure> {
    build_liouville_measure_in(field, gamma, eps, CellRegion::all(field.lattice()))
}

/// As [`build_liouville_measure`], but only cells in `region` receive
/// mass; the rest are left at zero.
pub fn build_liouville_measure_in(
    field: &FieldGrid,
    gamma: f64,
    eps: f64,
    region: CellRegion,
) -> Result<CellMeasure> {
    check_gamma(gamma)?;
    let l = *field.lattice();
    dyadic_level(eps, l.n)?;
    if field.domain().boundary() != BoundaryCondition::Dirichlet {
        return Err(Error::Config("the area measure is built on Dirichlet domains".into()));
    }
    let avg = cell_circle_averages(field, eps, region)?;
    let factor = eps.powf(gamma * gamma / 2.0) * l.cell_area();
    let mut mass = vec![0.0; l.cells_x() * l.cells_y()];
    for b in 0..region.ncy {
        for a in 0..region.ncx {
            let v = avg[b * region.ncx + a];
            if v.is_nan() {
                continue;
            }
            mass[(region.cj0 + b) * l.cells_x() + region.ci0 + a] = factor * (gamma * v).exp();
        }
    }
    CellMeasure::from_masses(*field.domain(), eps, gamma, mass)
}
