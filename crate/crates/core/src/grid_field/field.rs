use crate::error::{Error, Result};

use super::domain::{DomainSpec, Lattice, Point};

/// Node values of a field on the bounding lattice of a domain.
///
/// Sampled fields vanish at Dirichlet nodes. Fields perturbed by a constant
/// or a user grid carry the perturbation at every node, so that circle
/// averages of `h + g` equal those of `h` plus those of `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    domain: DomainSpec,
    lattice: Lattice,
    values: Vec<f64>,
    gamma: Option<f64>,
    seed: Option<u64>,
}

impl FieldGrid {
    pub fn zeros(domain: DomainSpec) -> Self {
        let lattice = domain.lattice();
        FieldGrid { domain, lattice, values: vec![0.0; lattice.node_count()], gamma: None, seed: None }
    }

    /// Wraps node values given row-major on the domain's lattice.
    pub fn from_values(domain: DomainSpec, values: Vec<f64>) -> Result<Self> {
        let lattice = domain.lattice();
        if values.len() != lattice.node_count() {
            return Err(Error::Shape(format!(
                "expected {} node values for a {}x{} lattice, got {}",
                lattice.node_count(),
                lattice.nx,
                lattice.ny,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite field value at node {k}")));
        }
        Ok(FieldGrid { domain, lattice, values, gamma: None, seed: None })
    }

    /// Evaluates `f` at every node.
    pub fn from_fn(domain: DomainSpec, f: impl Fn(Point) -> f64) -> Result<Self> {
        let l = domain.lattice();
        let mut values = Vec::with_capacity(l.node_count());
        for j in 0..l.ny {
            for i in 0..l.nx {
                values.push(f(l.node_pos(i, j)));
            }
        }
        Self::from_values(domain, values)
    }

    /// Like [`from_fn`](Self::from_fn) but zero at non-free nodes.
    pub fn from_fn_free(domain: DomainSpec, f: impl Fn(Point) -> f64) -> Result<Self> {
        let l = domain.lattice();
        Self::from_fn(domain, |p| {
            let (u, v) = l.to_grid(p);
            if l.is_free(u.round() as usize, v.round() as usize) {
                f(p)
            } else {
                0.0
            }
        })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_gamma(mut self, gamma: Option<f64>) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.lattice.idx(i, j)]
    }

    /// Bilinear interpolation of the node values. Points outside the lattice
    /// are clamped to its border cells.
    #[inline]
    pub fn interpolate(&self, p: Point) -> f64 {
        let l = &self.lattice;
        let (u, v) = l.to_grid(p);
        let i = (u.floor().max(0.0) as usize).min(l.nx - 2);
        let j = (v.floor().max(0.0) as usize).min(l.ny - 2);
        let fx = u - i as f64;
        let fy = v - j as f64;
        let k = l.idx(i, j);
        let (a, b) = (self.values[k], self.values[k + 1]);
        let (c, d) = (self.values[k + l.nx], self.values[k + l.nx + 1]);
        (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d)
    }

    fn check_same(&self, other: &FieldGrid) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::Shape(format!(
                "fields live on different domains ({:?} vs {:?})",
                self.domain, other.domain
            )));
        }
        Ok(())
    }

    /// Node-wise sum, e.g. a sampled field plus a deterministic perturbation.
    pub fn try_add(&self, other: &FieldGrid) -> Result<FieldGrid> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += b);
        Ok(out)
    }

    /// Node-wise difference.
    pub fn try_sub(&self, other: &FieldGrid) -> Result<FieldGrid> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    /// The field plus the constant `c` at every node.
    pub fn shifted(&self, c: f64) -> FieldGrid {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v += c);
        out
    }

    pub fn scaled(&self, s: f64) -> FieldGrid {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Largest absolute value over the Dirichlet (non-free) nodes.
    pub fn max_abs_on_dirichlet_nodes(&self) -> f64 {
        let l = &self.lattice;
        let mut m: f64 = 0.0;
        for j in 0..l.ny {
            for i in 0..l.nx {
                if !l.is_free(i, j) {
                    m = m.max(self.at(i, j).abs());
                }
            }
        }
        m
    }
}
