//! Sine transforms and the Dirichlet eigenbasis of the lattice Laplacian on a
//! square grid.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalised type-I discrete sine transform of length `m = N - 1`:
/// `y_k = Σ_{j=1}^{m} x_j sin(π j k / N)`.
#[derive(Clone)]
pub struct Dst1 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dst1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dst1").field("n", &self.n).finish()
    }
}

impl Dst1 {
    /// Transform on the `N - 1` interior points of `N` intervals.
    pub fn new(intervals: usize) -> Self {
        assert!(intervals >= 2);
        let fft = FftPlanner::new().plan_fft_forward(2 * intervals);
        Dst1 { n: intervals, fft }
    }

    pub fn len(&self) -> usize {
        self.n - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transforms each of the `rows` consecutive rows of length `len()` in
    /// place. Two real rows share one complex FFT.
    pub fn transform_rows(&self, data: &mut [f64], rows: usize) {
        let m = self.len();
        let n2 = 2 * self.n;
        assert_eq!(data.len(), m * rows);
        let pairs = rows.div_ceil(2);
        let mut buf = vec![Complex64::new(0.0, 0.0); pairs * n2];
        for p in 0..pairs {
            let a = &data[2 * p * m..(2 * p + 1) * m];
            let b = (2 * p + 1 < rows).then(|| &data[(2 * p + 1) * m..(2 * p + 2) * m]);
            let z = &mut buf[p * n2..(p + 1) * n2];
            for j in 1..=m {
                let v = Complex64::new(a[j - 1], b.map_or(0.0, |b| b[j - 1]));
                z[j] = v;
                z[n2 - j] = -v;
            }
        }
        self.fft.process(&mut buf);
        for p in 0..pairs {
            let z = &buf[p * n2..(p + 1) * n2];
            for k in 1..=m {
                data[2 * p * m + k - 1] = -0.5 * z[k].im;
                if 2 * p + 1 < rows {
                    data[(2 * p + 1) * m + k - 1] = 0.5 * z[k].re;
                }
            }
        }
    }

    /// Applies the transform along both axes of an `m × m` array.
    pub fn transform_2d(&self, data: &mut [f64]) {
        let m = self.len();
        self.transform_rows(data, m);
        transpose_in_place(data, m);
        self.transform_rows(data, m);
        transpose_in_place(data, m);
    }
}

fn transpose_in_place(data: &mut [f64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

/// Eigenvalues `4 sin²(πk/2N) + 4 sin²(πl/2N)` of the integer 5-point
/// Laplacian with Dirichlet data on an `N`-interval square, row-major in
/// `(l, k)` with `k, l = 1..N-1`.
pub fn square_eigenvalues(intervals: usize) -> Vec<f64> {
    let m = intervals - 1;
    let s: Vec<f64> = (1..=m)
        .map(|k| {
            let t = (PI * k as f64 / (2 * intervals) as f64).sin();
            4.0 * t * t
        })
        .collect();
    let mut out = Vec::with_capacity(m * m);
    for l in 0..m {
        for k in 0..m {
            out.push(s[k] + s[l]);
        }
    }
    out
}

/// Value of the orthonormal eigenvector `(k, l)` at interior node `(i, j)`:
/// `(2/N) sin(πki/N) sin(πlj/N)`.
pub fn square_eigenvector(intervals: usize, k: usize, l: usize, i: usize, j: usize) -> f64 {
    let n = intervals as f64;
    2.0 / n * (PI * (k * i) as f64 / n).sin() * (PI * (l * j) as f64 / n).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dst_matches_definition() {
        let n = 12;
        let dst = Dst1::new(n);
        let m = n - 1;
        let rows = 3;
        let x: Vec<f64> = (0..m * rows).map(|k| (k as f64 * 0.37).sin() + 0.1 * k as f64).collect();
        let mut y = x.clone();
        dst.transform_rows(&mut y, rows);
        for r in 0..rows {
            for k in 1..=m {
                let direct: f64 = (1..=m)
                    .map(|j| x[r * m + j - 1] * (PI * (j * k) as f64 / n as f64).sin())
                    .sum();
                assert!((direct - y[r * m + k - 1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dst_is_an_involution_up_to_scale() {
        let n = 16;
        let dst = Dst1::new(n);
        let m = n - 1;
        let x: Vec<f64> = (0..m * m).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let mut y = x.clone();
        dst.transform_2d(&mut y);
        dst.transform_2d(&mut y);
        let s = (2.0 / n as f64).powi(2);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - s * b).abs() < 1e-10);
        }
    }
}
