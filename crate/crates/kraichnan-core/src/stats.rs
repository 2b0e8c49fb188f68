//! Moment summaries, regression, and distribution tests for the Monte
//! Carlo suites.

use crate::error::Error;
use crate::exec::pairwise_sum;
use crate::Result;

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean, sample variance (n−1), and the standard error of the mean,
/// aggregated with pairwise sums so the result is order-stable.
pub fn mean_stderr(samples: &[f64]) -> MeanStderr {
    let n = samples.len();
    if n == 0 {
        return MeanStderr {
            mean: f64::NAN,
            stderr: f64::NAN,
            n,
        };
    }
    let mean = pairwise_sum(samples) / n as f64;
    if n == 1 {
        return MeanStderr {
            mean,
            stderr: 0.0,
            n,
        };
    }
    let sq: Vec<f64> = samples.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    MeanStderr {
        mean,
        stderr: (var / n as f64).sqrt(),
        n,
    }
}

/// Unbiased sample variance.
pub fn sample_variance(samples: &[f64]) -> f64 {
    let m = mean_stderr(samples);
    m.stderr * m.stderr * samples.len() as f64
}

/// Pearson correlation of two equal-length samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ma = pairwise_sum(a) / a.len() as f64;
    let mb = pairwise_sum(b) / b.len() as f64;
    let cov: Vec<f64> = a
        .iter()
        .zip(b.iter())
        .map(|(&x, &y)| (x - ma) * (y - mb))
        .collect();
    let va: Vec<f64> = a.iter().map(|&x| (x - ma) * (x - ma)).collect();
    let vb: Vec<f64> = b.iter().map(|&y| (y - mb) * (y - mb)).collect();
    pairwise_sum(&cov) / (pairwise_sum(&va) * pairwise_sum(&vb)).sqrt()
}

/// Weighted least-squares line fit y ≈ slope·x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the weighted residuals.
    pub slope_stderr: f64,
}

pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), w.len());
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "line fit needs >= 2 points, got {n}"
        )));
    }
    let sw: f64 = w.iter().sum();
    let mx: f64 = x.iter().zip(w).map(|(xi, wi)| xi * wi).sum::<f64>() / sw;
    let my: f64 = y.iter().zip(w).map(|(yi, wi)| yi * wi).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if sxx <= 0.0 {
        return Err(Error::InsufficientData(
            "degenerate abscissa in line fit".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // Residual variance scaled back through the weights.
    let mut chi2 = 0.0;
    for i in 0..n {
        let r = y[i] - slope * x[i] - intercept;
        chi2 += w[i] * r * r;
    }
    let dof = (n as f64 - 2.0).max(1.0);
    let slope_stderr = (chi2 / dof / sxx).sqrt();
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let (va, vb) = (a[i], b[j]);
        if va < vb {
            i += 1;
        } else if vb < va {
            j += 1;
        } else {
            while i < n && a[i] == va {
                i += 1;
            }
            while j < m && b[j] == vb {
                j += 1;
            }
        }
        let fa = i as f64 / n as f64;
        let fb = j as f64 / m as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Critical value for the two-sample KS test at significance `alpha`
/// (asymptotic). Rejection iff statistic exceeds this.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    // c(alpha) = sqrt(-ln(alpha/2)/2)
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}
