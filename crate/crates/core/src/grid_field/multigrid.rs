//! Multigrid-preconditioned conjugate gradients for the integer 5-point
//! Laplacian `4u(p) - Σ_{q~p} u(q)` on the free nodes of a square grid of
//! side `2^k + 1`. Non-free nodes carry zero.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SMOOTHING_SWEEPS: usize = 2;
const MAX_ITERATIONS: usize = 500;
const COARSEST_SIDE: usize = 9;

#[derive(Debug, Clone)]
struct Level {
    m: usize,
    mask: Vec<bool>,
    red: Vec<u32>,
    black: Vec<u32>,
}

impl Level {
    fn new(m: usize, mask: Vec<bool>) -> Self {
        let mut red = Vec::new();
        let mut black = Vec::new();
        for j in 0..m {
            for i in 0..m {
                let p = j * m + i;
                if mask[p] {
                    assert!(i > 0 && j > 0 && i + 1 < m && j + 1 < m, "free node on grid border");
                    if (i + j) % 2 == 0 {
                        red.push(p as u32);
                    } else {
                        black.push(p as u32);
                    }
                }
            }
        }
        Level { m, mask, red, black }
    }

    fn free_count(&self) -> usize {
        self.red.len() + self.black.len()
    }

    fn sweep(&self, u: &mut [f64], b: &[f64], list: &[u32]) {
        let m = self.m;
        for &p in list {
            let p = p as usize;
            u[p] = 0.25 * (b[p] + u[p - 1] + u[p + 1] + u[p - m] + u[p + m]);
        }
    }

    fn residual(&self, u: &[f64], b: &[f64], r: &mut [f64]) {
        let m = self.m;
        r.iter_mut().for_each(|v| *v = 0.0);
        for &p in self.red.iter().chain(&self.black) {
            let p = p as usize;
            r[p] = b[p] - (4.0 * u[p] - u[p - 1] - u[p + 1] - u[p - m] - u[p + m]);
        }
    }
}

/// Solver for `K u = b` restricted to a mask of free nodes.
#[derive(Debug, Clone)]
pub struct Multigrid {
    levels: Vec<Level>,
    coarse: Option<(Vec<usize>, nalgebra::Cholesky<f64, nalgebra::Dyn>)>,
}

impl Multigrid {
    /// `side` must be `2^k + 1` and the mask must leave the grid border fixed.
    pub fn new(side: usize, mask: Vec<bool>) -> Result<Self> {
        if side < 3 || !(side - 1).is_power_of_two() {
            return Err(Error::Shape(format!("grid side {side} is not 2^k + 1")));
        }
        if mask.len() != side * side {
            return Err(Error::Shape("mask size does not match grid".into()));
        }
        let mut levels = vec![Level::new(side, mask)];
        loop {
            let last = levels.last().expect("at least one level");
            if last.m <= COARSEST_SIDE || last.free_count() <= 64 {
                break;
            }
            let mc = (last.m - 1) / 2 + 1;
            let mut cmask = vec![false; mc * mc];
            for jc in 0..mc {
                for ic in 0..mc {
                    cmask[jc * mc + ic] = last.mask[(2 * jc) * last.m + 2 * ic];
                }
            }
            let next = Level::new(mc, cmask);
            if next.free_count() == 0 {
                break;
            }
            levels.push(next);
        }
        let coarse = {
            let lv = levels.last().expect("at least one level");
            let free: Vec<usize> =
                (0..lv.m * lv.m).filter(|&p| lv.mask[p]).collect();
            if free.is_empty() {
                None
            } else {
                let pos: std::collections::HashMap<usize, usize> =
                    free.iter().enumerate().map(|(k, &p)| (p, k)).collect();
                let mut a = DMatrix::<f64>::zeros(free.len(), free.len());
                for (k, &p) in free.iter().enumerate() {
                    a[(k, k)] = 4.0;
                    for q in [p - 1, p + 1, p - lv.m, p + lv.m] {
                        if let Some(&l) = pos.get(&q) {
                            a[(k, l)] = -1.0;
                        }
                    }
                }
                let chol = a
                    .cholesky()
                    .ok_or_else(|| Error::Input("coarse operator not positive definite".into()))?;
                Some((free, chol))
            }
        };
        Ok(Multigrid { levels, coarse })
    }

    pub fn side(&self) -> usize {
        self.levels[0].m
    }

    pub fn mask(&self) -> &[bool] {
        &self.levels[0].mask
    }

    pub fn free_count(&self) -> usize {
        self.levels[0].free_count()
    }

    /// `K u` on free nodes, zero elsewhere.
    pub fn apply_operator(&self, u: &[f64]) -> Vec<f64> {
        let lv = &self.levels[0];
        let mut out = vec![0.0; u.len()];
        let m = lv.m;
        for &p in lv.red.iter().chain(&lv.black) {
            let p = p as usize;
            let up = |q: usize| if lv.mask[q] { u[q] } else { 0.0 };
            out[p] = 4.0 * u[p] - up(p - 1) - up(p + 1) - up(p - m) - up(p + m);
        }
        out
    }

    fn vcycle(&self, level: usize, b: &[f64]) -> Vec<f64> {
        let lv = &self.levels[level];
        let mut u = vec![0.0; b.len()];
        if level + 1 == self.levels.len() {
            if let Some((free, chol)) = &self.coarse {
                let rhs = DVector::from_iterator(free.len(), free.iter().map(|&p| b[p]));
                let x = chol.solve(&rhs);
                for (k, &p) in free.iter().enumerate() {
                    u[p] = x[k];
                }
            }
            return u;
        }
        for _ in 0..SMOOTHING_SWEEPS {
            lv.sweep(&mut u, b, &lv.red);
            lv.sweep(&mut u, b, &lv.black);
        }
        let mut r = vec![0.0; b.len()];
        lv.residual(&u, b, &mut r);
        let coarse = &self.levels[level + 1];
        let (m, mc) = (lv.m, coarse.m);
        let mut bc = vec![0.0; mc * mc];
        for jc in 1..mc - 1 {
            for ic in 1..mc - 1 {
                let pc = jc * mc + ic;
                if !coarse.mask[pc] {
                    continue;
                }
                let p = 2 * jc * m + 2 * ic;
                bc[pc] = r[p]
                    + 0.5 * (r[p - 1] + r[p + 1] + r[p - m] + r[p + m])
                    + 0.25 * (r[p - m - 1] + r[p - m + 1] + r[p + m - 1] + r[p + m + 1]);
            }
        }
        let ec = self.vcycle(level + 1, &bc);
        for j in 1..m - 1 {
            for i in 1..m - 1 {
                let p = j * m + i;
                if !lv.mask[p] {
                    continue;
                }
                let (ic, jc) = (i / 2, j / 2);
                let c = |a: usize, b: usize| ec[(jc + b) * mc + ic + a];
                u[p] += match (i % 2, j % 2) {
                    (0, 0) => c(0, 0),
                    (1, 0) => 0.5 * (c(0, 0) + c(1, 0)),
                    (0, 1) => 0.5 * (c(0, 0) + c(0, 1)),
                    _ => 0.25 * (c(0, 0) + c(1, 0) + c(0, 1) + c(1, 1)),
                };
            }
        }
        for _ in 0..SMOOTHING_SWEEPS {
            lv.sweep(&mut u, b, &lv.black);
            lv.sweep(&mut u, b, &lv.red);
        }
        u
    }

    /// Solves `K u = b` to relative residual `tol`. Entries of `b` at
    /// non-free nodes are ignored.
    pub fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        let lv = &self.levels[0];
        if b.len() != lv.m * lv.m {
            return Err(Error::Shape("right-hand side size does not match grid".into()));
        }
        let mut r: Vec<f64> = b.iter().zip(&lv.mask).map(|(&v, &f)| if f { v } else { 0.0 }).collect();
        let mut x = vec![0.0; b.len()];
        let bnorm = dot(&r, &r).sqrt();
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut z = self.vcycle(0, &r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..MAX_ITERATIONS {
            let q = self.apply_operator(&p);
            let alpha = rz / dot(&p, &q);
            x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
            r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= alpha * qi);
            if dot(&r, &r).sqrt() <= tol * bnorm {
                return Ok(x);
            }
            z = self.vcycle(0, &r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        Err(Error::Input(format!("conjugate gradients did not reach {tol:e} in {MAX_ITERATIONS} iterations")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_mask(m: usize) -> Vec<bool> {
        let c = (m - 1) as f64 / 2.0;
        (0..m * m)
            .map(|p| {
                let (i, j) = ((p % m) as f64 - c, (p / m) as f64 - c);
                (i * i + j * j).sqrt() < c - 1e-9
            })
            .collect()
    }

    #[test]
    fn solves_against_dense() {
        let m = 33;
        let mask = disk_mask(m);
        let mg = Multigrid::new(m, mask.clone()).unwrap();
        let b: Vec<f64> = (0..m * m).map(|p| if mask[p] { ((p * 31) % 7) as f64 - 3.0 } else { 0.0 }).collect();
        let x = mg.solve(&b, 1e-12).unwrap();
        let kx = mg.apply_operator(&x);
        for p in 0..m * m {
            if mask[p] {
                assert!((kx[p] - b[p]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn square_grid_solve() {
        let m = 65;
        let mask: Vec<bool> =
            (0..m * m).map(|p| p % m != 0 && p % m != m - 1 && p / m != 0 && p / m != m - 1).collect();
        let mg = Multigrid::new(m, mask).unwrap();
        let mut b = vec![0.0; m * m];
        b[32 * m + 32] = 1.0;
        let x = mg.solve(&b, 1e-12).unwrap();
        let kx = mg.apply_operator(&x);
        assert!((kx[32 * m + 32] - 1.0).abs() < 1e-10);
        assert!(x[32 * m + 32] > 0.0);
    }
}
