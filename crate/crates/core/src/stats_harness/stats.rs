//! Sample statistics with jackknife standard errors.

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    sample_covariance(xs, xs)
}

/// Unbiased sample covariance.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pearson correlation.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    sample_covariance(xs, ys) / (sample_variance(xs) * sample_variance(ys)).sqrt()
}

/// Standard error of the mean.
pub fn mean_estimate(xs: &[f64]) -> Estimate {
    Estimate { value: mean(xs), se: (sample_variance(xs) / xs.len() as f64).sqrt() }
}

/// Jackknife standard error from leave-one-out values.
pub fn jackknife_se(loo: &[f64]) -> f64 {
    let n = loo.len() as f64;
    let m = mean(loo);
    ((n - 1.0) / n * loo.iter().map(|t| (t - m) * (t - m)).sum::<f64>()).sqrt()
}

/// Leave-one-out values of a statistic computed by `stat` on index subsets.
pub fn leave_one_out(n: usize, stat: impl Fn(&[usize]) -> f64) -> Vec<f64> {
    let mut idx: Vec<usize> = (1..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(stat(&idx));
        if i + 1 < n {
            idx[i] = i;
        }
    }
    out
}

/// Leave-one-out covariances in `O(n)` via centred sums.
fn loo_covariances(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let dx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let dy: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    dx.iter()
        .zip(&dy)
        .map(|(a, b)| (sxy - a * b - a * b / (n - 1.0)) / (n - 2.0))
        .collect()
}

/// Sample variance with a jackknife standard error.
pub fn jackknife_variance(xs: &[f64]) -> Estimate {
    jackknife_covariance(xs, xs)
}

/// Sample covariance with a jackknife standard error.
pub fn jackknife_covariance(xs: &[f64], ys: &[f64]) -> Estimate {
    assert_eq!(xs.len(), ys.len());
    Estimate { value: sample_covariance(xs, ys), se: jackknife_se(&loo_covariances(xs, ys)) }
}

/// Leave-one-out correlations.
pub fn loo_correlations(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let cxy = loo_covariances(xs, ys);
    let cxx = loo_covariances(xs, xs);
    let cyy = loo_covariances(ys, ys);
    cxy.iter().zip(&cxx).zip(&cyy).map(|((c, a), b)| c / (a * b).sqrt()).collect()
}

/// Pearson correlation with a jackknife standard error.
pub fn jackknife_correlation(xs: &[f64], ys: &[f64]) -> Estimate {
    assert_eq!(xs.len(), ys.len());
    Estimate { value: correlation(xs, ys), se: jackknife_se(&loo_correlations(xs, ys)) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_leave_one_out_matches_brute_force() {
        let xs = [0.3, -1.2, 2.5, 0.7, 0.0, 1.1, -0.4];
        let ys = [1.0, 0.2, -0.3, 2.2, 0.9, -1.5, 0.4];
        let brute = leave_one_out(xs.len(), |idx| {
            let a: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
            let b: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
            sample_covariance(&a, &b)
        });
        for (a, b) in brute.iter().zip(loo_covariances(&xs, &ys)) {
            assert!((a - b).abs() < 1e-12);
        }
        let corr = leave_one_out(xs.len(), |idx| {
            let a: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
            let b: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
            correlation(&a, &b)
        });
        for (a, b) in corr.iter().zip(loo_correlations(&xs, &ys)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jackknife_se_of_mean_is_classical() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let loo = leave_one_out(xs.len(), |idx| idx.iter().map(|&i| xs[i]).sum::<f64>() / idx.len() as f64);
        assert!((jackknife_se(&loo) - mean_estimate(&xs).se).abs() < 1e-12);
    }
}
