//! Green's functions of the lattice Laplacian, normalised as
//! `G = 2π K⁻¹` so that `G(x, y) ≈ -log|x - y|` at short range.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::domain::{BoundaryCondition, DomainSpec, Lattice, Shape};
use super::multigrid::Multigrid;
use super::spectral::{square_eigenvalues, Dst1};

/// Disks with at most this many free nodes get a dense Green matrix.
pub const DENSE_LIMIT: usize = 2048;
const SOLVER_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
enum Backend {
    Spectral { dst: Dst1, inv_eigen: Vec<f64> },
    Dense { slot: Vec<Option<usize>>, matrix: DMatrix<f64> },
    Solver { mg: Multigrid },
    Reflected { parent: Box<GreenTable> },
}

/// The Green's function of one domain. Immutable once built and cheap to
/// share between workers.
#[derive(Debug, Clone)]
pub struct GreenTable {
    domain: DomainSpec,
    lattice: Lattice,
    backend: Backend,
}

/// Builds the Green's function for `domain`: spectral on the square, dense
/// or multigrid-backed on the disk, by reflection on the upper disk.
pub fn green_table(domain: DomainSpec) -> Result<GreenTable> {
    let lattice = domain.lattice();
    let backend = match (domain.shape(), domain.boundary()) {
        (Shape::UnitSquare, _) => {
            let n = domain.resolution() as usize;
            Backend::Spectral {
                dst: Dst1::new(n),
                inv_eigen: square_eigenvalues(n).into_iter().map(|l| 2.0 * PI / l).collect(),
            }
        }
        (Shape::UnitDisk, _) => {
            let mask = lattice.free_mask();
            let free = mask.iter().filter(|&&f| f).count();
            if free <= DENSE_LIMIT {
                let (slot, matrix) = dense_green(&lattice, &mask)?;
                Backend::Dense { slot, matrix }
            } else {
                Backend::Solver { mg: Multigrid::new(lattice.nx, mask)? }
            }
        }
        (Shape::UpperUnitDisk, BoundaryCondition::MixedDirichletNeumann) => {
            let parent = domain.reflection_parent().expect("upper disk has a parent");
            Backend::Reflected { parent: Box::new(green_table(parent)?) }
        }
        (Shape::UpperUnitDisk, BoundaryCondition::Dirichlet) => {
            return Err(Error::Config(
                "the upper disk is only supported with the mixed boundary condition".into(),
            ))
        }
    };
    Ok(GreenTable { domain, lattice, backend })
}

/// Dense `2π K⁻¹` on the free nodes of `mask`, explicitly symmetrised.
fn dense_green(lattice: &Lattice, mask: &[bool]) -> Result<(Vec<Option<usize>>, DMatrix<f64>)> {
    let mut slot = vec![None; mask.len()];
    let mut count = 0;
    for (p, &f) in mask.iter().enumerate() {
        if f {
            slot[p] = Some(count);
            count += 1;
        }
    }
    let mut k = DMatrix::<f64>::zeros(count, count);
    let nx = lattice.nx;
    for (p, s) in slot.iter().enumerate() {
        let Some(a) = *s else { continue };
        k[(a, a)] = 4.0;
        for q in [p - 1, p + 1, p - nx, p + nx] {
            if let Some(b) = slot[q] {
                k[(a, b)] = -1.0;
            }
        }
    }
    let chol = k
        .cholesky()
        .ok_or_else(|| Error::Input("lattice Laplacian is not positive definite".into()))?;
    let inv = chol.inverse() * (2.0 * PI);
    let sym = (&inv + inv.transpose()) * 0.5;
    Ok((slot, sym))
}

impl GreenTable {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Name of the construction in use, for metadata.
    pub fn method(&self) -> &'static str {
        match self.backend {
            Backend::Spectral { .. } => "spectral",
            Backend::Dense { .. } => "dense",
            Backend::Solver { .. } => "multigrid",
            Backend::Reflected { .. } => "reflected",
        }
    }

    /// `G(x, y)` for lattice nodes `x = (i, j)` and `y`. Exactly symmetric;
    /// zero if either node is a Dirichlet node.
    pub fn get(&self, x: (usize, usize), y: (usize, usize)) -> f64 {
        let l = &self.lattice;
        if !l.is_free(x.0, x.1) || !l.is_free(y.0, y.1) {
            return 0.0;
        }
        match &self.backend {
            Backend::Spectral { inv_eigen, .. } => {
                let n = l.n as usize;
                let m = n - 1;
                let nf = n as f64;
                let s = |k: usize, i: usize| (PI * (k * i) as f64 / nf).sin();
                let a: Vec<f64> = (1..=m).map(|k| s(k, x.0) * s(k, y.0)).collect();
                let b: Vec<f64> = (1..=m).map(|k| s(k, x.1) * s(k, y.1)).collect();
                let mut total = 0.0;
                for (lq, bl) in b.iter().enumerate() {
                    let row = &inv_eigen[lq * m..(lq + 1) * m];
                    let inner: f64 = row.iter().zip(&a).map(|(w, ak)| w * ak).sum();
                    total += inner * bl;
                }
                total * (2.0 / nf) * (2.0 / nf)
            }
            Backend::Dense { slot, matrix } => {
                let a = slot[l.idx(x.0, x.1)].expect("free node");
                let b = slot[l.idx(y.0, y.1)].expect("free node");
                matrix[(a, b)]
            }
            Backend::Solver { mg } => {
                let (p, q) = (l.idx(x.0, x.1), l.idx(y.0, y.1));
                let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
                let mut e = vec![0.0; l.node_count()];
                e[lo] = 1.0;
                let col = mg.solve(&e, SOLVER_TOL).expect("multigrid solve converges");
                2.0 * PI * col[hi]
            }
            Backend::Reflected { parent } => {
                let off = l.n as usize;
                let xr = (x.0, x.1 + off);
                let yr = (y.0, y.1 + off);
                let xc = (x.0, off - x.1);
                let yc = (y.0, off - y.1);
                parent.get(xr, yr) + 0.5 * (parent.get(xr, yc) + parent.get(xc, yr))
            }
        }
    }

    /// `G w` for node weights `w` (row-major on the lattice).
    pub fn apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        let l = &self.lattice;
        if w.len() != l.node_count() {
            return Err(Error::Shape(format!(
                "weight vector has {} entries, lattice has {}",
                w.len(),
                l.node_count()
            )));
        }
        match &self.backend {
            Backend::Spectral { dst, inv_eigen } => {
                let n = l.n as usize;
                let m = n - 1;
                let mut c = vec![0.0; m * m];
                for j in 1..n {
                    for i in 1..n {
                        c[(j - 1) * m + i - 1] = w[l.idx(i, j)];
                    }
                }
                dst.transform_2d(&mut c);
                let s = (2.0 / n as f64).powi(2);
                c.iter_mut().zip(inv_eigen).for_each(|(v, g)| *v *= g * s);
                dst.transform_2d(&mut c);
                let mut out = vec![0.0; l.node_count()];
                for j in 1..n {
                    for i in 1..n {
                        out[l.idx(i, j)] = c[(j - 1) * m + i - 1];
                    }
                }
                Ok(out)
            }
            Backend::Dense { slot, matrix } => {
                let mut out = vec![0.0; l.node_count()];
                let free: Vec<(usize, usize)> =
                    slot.iter().enumerate().filter_map(|(p, s)| s.map(|a| (p, a))).collect();
                for &(p, a) in &free {
                    out[p] = free.iter().map(|&(q, b)| matrix[(a, b)] * w[q]).sum();
                }
                Ok(out)
            }
            Backend::Solver { mg } => {
                let mut u = mg.solve(w, SOLVER_TOL)?;
                u.iter_mut().for_each(|v| *v *= 2.0 * PI);
                Ok(u)
            }
            Backend::Reflected { parent } => {
                let pl = parent.lattice;
                let off = l.n as usize;
                let mut v = vec![0.0; pl.node_count()];
                for j in 0..l.ny {
                    for i in 0..l.nx {
                        if !l.is_free(i, j) {
                            continue;
                        }
                        let x = w[l.idx(i, j)];
                        v[pl.idx(i, j + off)] += x;
                        v[pl.idx(i, off - j)] += x;
                    }
                }
                let g = parent.apply(&v)?;
                let mut out = vec![0.0; l.node_count()];
                for j in 0..l.ny {
                    for i in 0..l.nx {
                        if l.is_free(i, j) {
                            out[l.idx(i, j)] = g[pl.idx(i, j + off)];
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// `wᵀ G w`.
    pub fn quadratic_form(&self, w: &[f64]) -> Result<f64> {
        match &self.backend {
            Backend::Spectral { dst, inv_eigen } => {
                let l = &self.lattice;
                if w.len() != l.node_count() {
                    return Err(Error::Shape("weight vector does not match lattice".into()));
                }
                let n = l.n as usize;
                let m = n - 1;
                let mut c = vec![0.0; m * m];
                for j in 1..n {
                    for i in 1..n {
                        c[(j - 1) * m + i - 1] = w[l.idx(i, j)];
                    }
                }
                dst.transform_2d(&mut c);
                let s = (2.0 / n as f64).powi(2);
                Ok(c.iter().zip(inv_eigen).map(|(v, g)| v * v * g).sum::<f64>() * s)
            }
            _ => self.bilinear(w, w),
        }
    }

    /// `uᵀ G w`.
    pub fn bilinear(&self, u: &[f64], w: &[f64]) -> Result<f64> {
        let gw = self.apply(w)?;
        if u.len() != gw.len() {
            return Err(Error::Shape("weight vector does not match lattice".into()));
        }
        Ok(u.iter().zip(&gw).map(|(a, b)| a * b).sum())
    }

    /// `G(·, y)` as a node vector.
    pub fn column(&self, y: (usize, usize)) -> Result<Vec<f64>> {
        let mut e = vec![0.0; self.lattice.node_count()];
        if self.lattice.is_free(y.0, y.1) {
            e[self.lattice.idx(y.0, y.1)] = 1.0;
        }
        self.apply(&e)
    }
}
