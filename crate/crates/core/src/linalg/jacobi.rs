//! Cyclic Jacobi eigenvalue iteration for dense real symmetric matrices.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of the symmetric `n × n` row-major matrix `a`, ascending.
///
/// Sweeps until the off-diagonal Frobenius norm falls below `tol` times the
/// Frobenius norm of the input.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize, tol: f64) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::dim(n * n, a.len()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let total: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let threshold = tol * total;
    let mut sweeps = 0;
    while off(&a) > threshold {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::Numeric("Jacobi iteration did not converge".into()));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

pub fn min_symmetric_eigenvalue(a: Vec<f64>, n: usize, tol: f64) -> Result<f64> {
    Ok(symmetric_eigenvalues(a, n, tol)?
        .first()
        .copied()
        .unwrap_or(f64::INFINITY))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let e = symmetric_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2, 1e-14).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_needs_no_sweeps() {
        let e = symmetric_eigenvalues(vec![3.0, 0.0, 0.0, -1.0], 2, 1e-14).unwrap();
        assert_eq!(e, vec![-1.0, 3.0]);
    }

    #[test]
    fn second_difference_spectrum() {
        let n = 12;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 2.0;
            if i + 1 < n {
                a[i * n + i + 1] = -1.0;
                a[(i + 1) * n + i] = -1.0;
            }
        }
        let e = symmetric_eigenvalues(a, n, 1e-14).unwrap();
        for (k, ev) in e.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((ev - exact).abs() < 1e-12, "{k}: {ev} vs {exact}");
        }
    }
}
