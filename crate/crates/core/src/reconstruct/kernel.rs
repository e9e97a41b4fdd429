use crate::error::{Error, Result};
use crate::fft::Stencil;

/// Unnormalised radial profile `exp(-1/(1 - r²))` on `[0, 1)`, zero
/// outside.
pub fn bump_profile(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelDim {
    One,
    Two,
}

impl KernelDim {
    pub fn exponent(self) -> i32 {
        match self {
            KernelDim::One => 1,
            KernelDim::Two => 2,
        }
    }
}

/// Smooth radial mollifier `η^ε` at one dyadic scale, normalised so that
/// its sum over lattice cells (or bins) seen from a lattice node, times the
/// cell area (or bin length), equals one.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    dim: KernelDim,
    eps: f64,
    n: u32,
    norm: f64,
    /// Cell offsets relative to a node: cell `(i + a, j + b)` has its centre
    /// at `((a + 1/2) h, (b + 1/2) h)` from node `(i, j)`.
    stencil: Stencil,
}

/// Discretised mollifier at scale `eps` for a lattice of resolution `n`.
pub fn make_kernel(eps: f64, dim: KernelDim, n: u32) -> Result<Kernel> {
    if !(eps.is_finite() && eps >= 2.0 / n as f64 * (1.0 - 1e-12)) {
        return Err(Error::Precondition(format!(
            "kernel scale {eps} is below two lattice spacings at resolution {n}"
        )));
    }
    let h = 1.0 / n as f64;
    let reach = (eps / h).ceil() as i32 + 1;
    let mut offsets = Vec::new();
    let mut raw = Vec::new();
    let ys: Vec<i32> = match dim {
        KernelDim::One => vec![0],
        KernelDim::Two => (-reach..=reach).collect(),
    };
    for &b in &ys {
        for a in -reach..=reach {
            let dx = (a as f64 + 0.5) * h;
            let dy = if dim == KernelDim::Two { (b as f64 + 0.5) * h } else { 0.0 };
            let v = bump_profile((dx * dx + dy * dy).sqrt() / eps);
            if v > 0.0 {
                offsets.push((a, b));
                raw.push(v);
            }
        }
    }
    let cell = h.powi(dim.exponent());
    let norm = 1.0 / (raw.iter().sum::<f64>() * cell);
    let weights = raw.iter().map(|v| v * norm).collect();
    Ok(Kernel { dim, eps, n, norm, stencil: Stencil::new(offsets, weights) })
}

impl Kernel {
    pub fn dim(&self) -> KernelDim {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn resolution(&self) -> u32 {
        self.n
    }

    /// `η^ε` at displacement `(dx, dy)` (ignore `dy` in 1D); exactly zero
    /// for `|x| >= ε`.
    #[inline]
    pub fn density(&self, dx: f64, dy: f64) -> f64 {
        let r = match self.dim {
            KernelDim::One => dx.abs(),
            KernelDim::Two => (dx * dx + dy * dy).sqrt(),
        };
        self.norm * bump_profile(r / self.eps)
    }

    /// Value at the origin.
    pub fn peak(&self) -> f64 {
        self.norm * bump_profile(0.0)
    }

    /// Node-to-cell stencil used by the FFT estimator.
    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    /// Sum of the stencil weights times the cell area or bin length.
    pub fn discrete_mass(&self) -> f64 {
        self.stencil.total_weight() * (1.0 / self.n as f64).powi(self.dim.exponent())
    }

    /// The kernel multiplied by a positive constant.
    pub fn scaled(&self, c: f64) -> Kernel {
        let mut k = self.clone();
        k.norm *= c;
        k.stencil.weights.iter_mut().for_each(|w| *w *= c);
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation_and_support() {
        for dim in [KernelDim::One, KernelDim::Two] {
            let k = make_kernel(0.125, dim, 64).unwrap();
            assert!((k.discrete_mass() - 1.0).abs() < 1e-10);
            assert_eq!(k.density(0.125, 0.0), 0.0);
            assert_eq!(k.density(0.2, 0.0), 0.0);
            assert!(k.density(0.1, 0.0) > 0.0);
        }
        assert!(make_kernel(1.0 / 64.0, KernelDim::Two, 64).is_err());
    }

    #[test]
    fn radial_symmetry() {
        let k = make_kernel(0.0625, KernelDim::Two, 128).unwrap();
        let s = k.stencil();
        for (&(a, b), &w) in s.offsets.iter().zip(&s.weights) {
            let mirrored = s.offsets.iter().position(|&o| o == (-1 - a, b)).unwrap();
            assert_eq!(s.weights[mirrored], w);
            let swapped = s.offsets.iter().position(|&o| o == (b, a)).unwrap();
            assert!((s.weights[swapped] - w).abs() < 1e-12 * w);
        }
    }
}
