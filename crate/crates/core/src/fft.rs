//! Stencil correlation on rectangular grids, directly or through 2D FFTs.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// A finite stencil: `out(p) = Σ w · in(p + offset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub offsets: Vec<(i32, i32)>,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn new(offsets: Vec<(i32, i32)>, weights: Vec<f64>) -> Self {
        assert_eq!(offsets.len(), weights.len());
        Stencil { offsets, weights }
    }

    /// `(min_x, max_x, min_y, max_y)` of the offsets.
    pub fn extent(&self) -> (i32, i32, i32, i32) {
        self.offsets.iter().fold(
            (i32::MAX, i32::MIN, i32::MAX, i32::MIN),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        )
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// A real row-major grid view.
#[derive(Debug, Clone, Copy)]
pub struct GridRef<'a> {
    pub data: &'a [f64],
    pub nx: usize,
    pub ny: usize,
}

impl GridRef<'_> {
    #[inline]
    fn get(&self, x: i64, y: i64) -> f64 {
        if x < 0 || y < 0 || x >= self.nx as i64 || y >= self.ny as i64 {
            0.0
        } else {
            self.data[y as usize * self.nx + x as usize]
        }
    }
}

/// A rectangle of output positions, `origin` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub x0: i64,
    pub y0: i64,
    pub nx: usize,
    pub ny: usize,
}

/// Correlates by direct summation. Samples outside the grid read as zero.
pub fn correlate_direct(input: GridRef<'_>, stencil: &Stencil, out: Window) -> Vec<f64> {
    let mut res = vec![0.0; out.nx * out.ny];
    for ty in 0..out.ny {
        for tx in 0..out.nx {
            let (px, py) = (out.x0 + tx as i64, out.y0 + ty as i64);
            res[ty * out.nx + tx] = stencil
                .offsets
                .iter()
                .zip(&stencil.weights)
                .map(|(&(a, b), &w)| w * input.get(px + a as i64, py + b as i64))
                .sum();
        }
    }
    res
}

/// Smallest integer `>= n` whose prime factors are 2, 3 and 5.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Plans reused across correlations of the same padded size.
pub struct Correlator {
    planner: FftPlanner<f64>,
}

impl Default for Correlator {
    fn default() -> Self {
        Self::new()
    }
}

impl Correlator {
    pub fn new() -> Self {
        Correlator { planner: FftPlanner::new() }
    }

    fn plans(&mut self, len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        (self.planner.plan_fft_forward(len), self.planner.plan_fft_inverse(len))
    }

    /// Correlates `input` with `stencil` on `out` through zero-padded FFTs.
    /// Agrees with [`correlate_direct`] up to rounding.
    pub fn correlate(&mut self, input: GridRef<'_>, stencil: &Stencil, out: Window) -> Vec<f64> {
        let prepared = self.prepare(input, stencil, out);
        self.apply(&prepared, stencil)
    }

    /// Correlates one input with several stencils that share a footprint
    /// bound, transforming the input once.
    pub fn correlate_many(
        &mut self,
        input: GridRef<'_>,
        stencils: &[&Stencil],
        out: Window,
    ) -> Vec<Vec<f64>> {
        if stencils.is_empty() {
            return Vec::new();
        }
        let hull = hull(stencils);
        let prepared = self.prepare(input, &hull, out);
        stencils.iter().map(|s| self.apply(&prepared, s)).collect()
    }

    fn prepare(&mut self, input: GridRef<'_>, footprint: &Stencil, out: Window) -> Prepared {
        let (ax, bx, ay, by) = footprint.extent();
        let lx = out.nx + (bx - ax) as usize;
        let ly = out.ny + (by - ay) as usize;
        let (px, py) = (fast_len(lx), fast_len(ly));
        let (bxo, byo) = (out.x0 + ax as i64, out.y0 + ay as i64);
        let mut buf = vec![Complex64::new(0.0, 0.0); px * py];
        for q in 0..ly {
            for p in 0..lx {
                let v = input.get(bxo + p as i64, byo + q as i64);
                if v != 0.0 {
                    buf[q * px + p] = Complex64::new(v, 0.0);
                }
            }
        }
        let (fx, ix) = self.plans(px);
        let (fy, iy) = self.plans(py);
        fft2(&mut buf, px, py, &fx, &fy);
        Prepared { spectrum: buf, px, py, ax, ay, out, fx: ix, fy: iy }
    }

    fn apply(&mut self, prep: &Prepared, stencil: &Stencil) -> Vec<f64> {
        let (px, py) = (prep.px, prep.py);
        let mut k = vec![Complex64::new(0.0, 0.0); px * py];
        for (&(a, b), &w) in stencil.offsets.iter().zip(&stencil.weights) {
            let d = (a - prep.ax) as usize;
            let e = (b - prep.ay) as usize;
            k[e * px + d] += Complex64::new(w, 0.0);
        }
        let (fxf, _) = self.plans(px);
        let (fyf, _) = self.plans(py);
        fft2(&mut k, px, py, &fxf, &fyf);
        for (kv, sv) in k.iter_mut().zip(&prep.spectrum) {
            *kv = sv * kv.conj();
        }
        fft2(&mut k, px, py, &prep.fx, &prep.fy);
        let scale = 1.0 / (px * py) as f64;
        let mut res = vec![0.0; prep.out.nx * prep.out.ny];
        for t in 0..prep.out.ny {
            for s in 0..prep.out.nx {
                res[t * prep.out.nx + s] = k[t * px + s].re * scale;
            }
        }
        res
    }
}

struct Prepared {
    spectrum: Vec<Complex64>,
    px: usize,
    py: usize,
    ax: i32,
    ay: i32,
    out: Window,
    fx: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
}

fn hull(stencils: &[&Stencil]) -> Stencil {
    let (mut a, mut b, mut c, mut d) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
    for s in stencils {
        let (sa, sb, sc, sd) = s.extent();
        a = a.min(sa);
        b = b.max(sb);
        c = c.min(sc);
        d = d.max(sd);
    }
    Stencil::new(vec![(a, c), (b, d)], vec![0.0, 0.0])
}

/// In-place 2D transform of a `px × py` row-major buffer.
fn fft2(buf: &mut [Complex64], px: usize, py: usize, fx: &Arc<dyn Fft<f64>>, fy: &Arc<dyn Fft<f64>>) {
    fx.process(buf);
    let mut t = transpose(buf, px, py);
    fy.process(&mut t);
    let back = transpose(&t, py, px);
    buf.copy_from_slice(&back);
}

fn transpose(src: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let mut dst = vec![Complex64::new(0.0, 0.0); w * h];
    const B: usize = 32;
    for yb in (0..h).step_by(B) {
        for xb in (0..w).step_by(B) {
            for y in yb..(yb + B).min(h) {
                for x in xb..(xb + B).min(w) {
                    dst[x * h + y] = src[y * w + x];
                }
            }
        }
    }
    dst
}
