//! Dense symmetric factorization with the shared jitter policy.
//!
//! Covariance matrices here are small (a handful of curvilinear anchors) to
//! moderate (spatial grids up to a couple thousand points), so a plain
//! Cholesky is the right tool. Near-degenerate kernels (e.g. constant ρ,
//! perfectly correlated columns) make the matrix singular; the policy is to
//! retry with diagonal jitter escalating 1e-12 → 1e-8 relative to the mean
//! diagonal, four attempts total, then fail.

use crate::error::Error;
use crate::Result;

/// Lower-triangular Cholesky factor stored row-major.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    data: Vec<f64>,
    /// Jitter (absolute) that was added to the diagonal to factorize.
    pub jitter: f64,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// y = L·x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (i, out) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.n..i * self.n + i + 1];
            let mut acc = 0.0;
            for (l, &xj) in row.iter().zip(x.iter()) {
                acc += l * xj;
            }
            *out = acc;
        }
        y
    }
}

fn try_cholesky(a: &[f64], n: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            if i == j {
                sum += jitter;
            }
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Factor a symmetric positive semidefinite matrix (row-major, `n × n`),
/// escalating diagonal jitter on failure.
pub fn cholesky_with_jitter(a: &[f64], n: usize) -> Result<CholeskyFactor> {
    assert_eq!(a.len(), n * n);
    let mean_diag = (0..n).map(|i| a[i * n + i]).sum::<f64>() / n.max(1) as f64;
    let scale = if mean_diag > 0.0 { mean_diag } else { 1.0 };
    for &rel in &[0.0, 1e-12, 1e-10, 1e-8] {
        let jitter = rel * scale;
        if let Some(data) = try_cholesky(a, n, jitter) {
            return Ok(CholeskyFactor { n, data, jitter });
        }
    }
    Err(Error::DegenerateKernel(format!(
        "covariance factorization failed for n = {n} after jitter up to 1e-8 relative"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_identity() {
        let a = vec![1.0, 0.0, 0.0, 1.0];
        let f = cholesky_with_jitter(&a, 2).unwrap();
        assert_eq!(f.jitter, 0.0);
        let y = f.mul_vec(&[2.0, 3.0]);
        assert_eq!(y, vec![2.0, 3.0]);
    }

    #[test]
    fn reconstructs_spd_matrix() {
        // A = L0 L0^T for a fixed L0, then check chol(A) reproduces A.
        let l0 = [2.0, 0.0, 0.0, 0.5, 1.5, 0.0, -0.3, 0.7, 1.1];
        let n = 3;
        let mut a = vec![0.0; 9];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += l0[i * n + k] * l0[j * n + k];
                }
                a[i * n + j] = s;
            }
        }
        let f = cholesky_with_jitter(&a, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += f.data[i * n + k] * f.data[j * n + k];
                }
                assert!((s - a[i * n + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_deficient_needs_jitter() {
        // Constant-correlation matrix is rank one; jitter must kick in.
        let a = vec![3.0; 16];
        let f = cholesky_with_jitter(&a, 4).unwrap();
        assert!(f.jitter > 0.0);
    }

    #[test]
    fn indefinite_fails() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_with_jitter(&a, 2).is_err());
    }
}
