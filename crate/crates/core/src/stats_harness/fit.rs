//! Least-squares line and log-log fits.

use crate::error::{Error, Result};

/// `y ≈ slope · x + intercept` with the coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!("{} abscissae for {} values", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::Input("a line fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r2 })
}

/// Least-squares weights `c_k` with `slope = Σ c_k y_k`.
pub fn slope_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    xs.iter().map(|x| (x - mx) / sxx).collect()
}

/// Fits `log value` against `log scale`.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 3 {
        return Err(Error::Input(format!("a log-slope fit needs at least 3 points, got {}", points.len())));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(s, v) in points {
        if !(s > 0.0) || !(v > 0.0) {
            return Err(Error::Input(format!("log-slope fit needs positive data, got ({s}, {v})")));
        }
        xs.push(s.ln());
        ys.push(v.ln());
    }
    linear_fit(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, (k * k) as f64)).collect();
        let f = fit_log_slope(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 3.0)).collect();
        assert_eq!(fit_log_slope(&flat).unwrap().slope, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_log_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::Input(_))));
        assert!(matches!(fit_log_slope(&[(1.0, 1.0), (2.0, 1.0)]), Err(Error::Input(_))));
    }
}
