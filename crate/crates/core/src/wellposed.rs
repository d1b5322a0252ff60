//! Solvability hypotheses of the evolution system: the coercivity constant
//! of `ρ M0 + Re M1`, scans for `rho0`, the numerical range of the affine
//! symbol and positivity of trace material laws.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{min_symmetric_eigenvalue, SparseMatrix};
use crate::space::WeightMatrix;

const EIGEN_TOL: f64 = 1e-13;
const SYMBOL_TOL: f64 = 1e-12;
const NEVANLINNA_TOL: f64 = 1e-14;
const SCAN_EXPONENTS: std::ops::RangeInclusive<i32> = -10..=40;
const BISECTION_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityReport {
    pub rho: f64,
    /// Smallest eigenvalue of `ρ M0 + sym(M1)` in the weighted inner product.
    pub c0: f64,
    pub satisfied: bool,
    /// `1 / c0` when satisfied, otherwise infinite.
    pub bound: f64,
}

/// Affine trace law `μ(∂₀⁻¹) = mu0 + ∂₀⁻¹ mu1`, with symbol `R(z) = mu0 z + mu1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NevanlinnaSpec {
    pub mu0: f64,
    pub mu1: f64,
}

impl NevanlinnaSpec {
    pub fn new(mu0: f64, mu1: f64) -> Result<Self> {
        let s = NevanlinnaSpec { mu0, mu1 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu0 >= 0.0 && self.mu1 >= 0.0) || !self.mu0.is_finite() || !self.mu1.is_finite() {
            return Err(Error::Parameter(format!(
                "trace law ({}, {}) must be nonnegative",
                self.mu0, self.mu1
            )));
        }
        if self.mu0 == 0.0 && self.mu1 == 0.0 {
            return Err(Error::Parameter(
                "trace law coefficients must be non-negative reals with not both zero".into(),
            ));
        }
        Ok(())
    }

    /// `R(z) = z μ(1/z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        z * self.mu0 + self.mu1
    }
}

/// `½ (M + W⁻¹ Mᵀ W)`.
pub fn symmetric_part(m: &SparseMatrix, w: &WeightMatrix) -> SparseMatrix {
    let wd = w.diag();
    let inv: Vec<f64> = wd.iter().map(|x| 1.0 / x).collect();
    let adj = m.transpose().scale(&inv, wd);
    m.add_scaled(&adj, 1.0).scaled(0.5)
}

fn check_square(m0: &SparseMatrix, m1: &SparseMatrix, w: &WeightMatrix) -> Result<usize> {
    let n = w.len();
    for m in [m0, m1] {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::dim(n, m.nrows()));
        }
        if !m.is_finite() {
            return Err(Error::Numeric("material law has non-finite entries".into()));
        }
    }
    Ok(n)
}

/// Dense `W^{1/2} M W^{-1/2}`, symmetrized.
fn similarity_dense(m: &SparseMatrix, w: &WeightMatrix) -> Vec<f64> {
    let n = w.len();
    let sq: Vec<f64> = w.diag().iter().map(|x| x.sqrt()).collect();
    let mut d = vec![0.0; n * n];
    for (i, j, v) in m.triplets() {
        d[i * n + j] += 0.5 * sq[i] * v / sq[j];
        d[j * n + i] += 0.5 * sq[i] * v / sq[j];
    }
    d
}

pub fn coercivity(m0: &SparseMatrix, m1: &SparseMatrix, rho: f64, w: &WeightMatrix) -> Result<CoercivityReport> {
    let n = check_square(m0, m1, w)?;
    if !rho.is_finite() || !(rho > 0.0) {
        return Err(Error::Numeric(format!("rho must be positive and finite, got {rho}")));
    }
    let s = m0.scaled(rho).add_scaled(&symmetric_part(m1, w), 1.0);
    let c0 = min_symmetric_eigenvalue(similarity_dense(&s, w), n, EIGEN_TOL)?;
    let satisfied = c0 > 0.0;
    Ok(CoercivityReport {
        rho,
        c0,
        satisfied,
        bound: if satisfied { 1.0 / c0 } else { f64::INFINITY },
    })
}

pub fn find_rho0(m0: &SparseMatrix, m1: &SparseMatrix, c_target: f64, w: &WeightMatrix) -> Result<f64> {
    find_rho0_with(Execution::default(), m0, m1, c_target, w)
}

/// Smallest `ρ` with `c0(ρ) ≥ c_target`: a scan over `2^k`, `k = -10..=40`,
/// refined by bisection.
pub fn find_rho0_with(
    exec: Execution,
    m0: &SparseMatrix,
    m1: &SparseMatrix,
    c_target: f64,
    w: &WeightMatrix,
) -> Result<f64> {
    if !(c_target > 0.0) {
        return Err(Error::Parameter(format!("c_target must be positive, got {c_target}")));
    }
    let rhos: Vec<f64> = SCAN_EXPONENTS.map(|k| 2f64.powi(k)).collect();
    let c0s = exec.try_map(&rhos, |&rho| coercivity(m0, m1, rho, w).map(|r| r.c0))?;
    let Some(k) = c0s.iter().position(|c| *c >= c_target) else {
        return Err(Error::NotCoercive(format!(
            "c0 stays below {c_target} for rho up to 2^{}",
            SCAN_EXPONENTS.end()
        )));
    };
    if k == 0 {
        return Ok(rhos[0]);
    }
    let (mut lo, mut hi) = (rhos[k - 1], rhos[k]);
    while hi - lo > BISECTION_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if coercivity(m0, m1, mid, w)?.c0 >= c_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Minimum eigenvalue of the weighted Hermitian part of `(ρ + iλ) M0 + M1`
/// over the λ grid.
///
/// For an affine law this does not depend on λ and equals
/// `coercivity(ρ).c0`; a disagreement beyond 1e-12 is reported as an error.
pub fn symbol_range_check(
    m0: &SparseMatrix,
    m1: &SparseMatrix,
    rho: f64,
    lambdas: &[f64],
    w: &WeightMatrix,
) -> Result<f64> {
    symbol_range_check_with(Execution::default(), m0, m1, rho, lambdas, w)
}

pub fn symbol_range_check_with(
    exec: Execution,
    m0: &SparseMatrix,
    m1: &SparseMatrix,
    rho: f64,
    lambdas: &[f64],
    w: &WeightMatrix,
) -> Result<f64> {
    let n = check_square(m0, m1, w)?;
    if lambdas.is_empty() {
        return Err(Error::Parameter("empty lambda grid".into()));
    }
    let reference = coercivity(m0, m1, rho, w)?.c0;
    let sq: Vec<f64> = w.diag().iter().map(|x| x.sqrt()).collect();
    let values = exec.try_map(lambdas, |&lambda| -> Result<f64> {
        // Real embedding [[X, -Y], [Y, X]] of the Hermitian part X + iY of
        // W^{1/2} Z W^{-1/2}, Z = (ρ + iλ) M0 + M1.
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for (i, j, v) in m0.triplets() {
            let s = sq[i] / sq[j];
            re[i * n + j] += rho * v * s;
            im[i * n + j] += lambda * v * s;
        }
        for (i, j, v) in m1.triplets() {
            re[i * n + j] += v * sq[i] / sq[j];
        }
        let m = 2 * n;
        let mut emb = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let x = 0.5 * (re[i * n + j] + re[j * n + i]);
                let y = 0.5 * (im[i * n + j] - im[j * n + i]);
                emb[i * m + j] = x;
                emb[(i + n) * m + (j + n)] = x;
                emb[i * m + (j + n)] = -y;
                emb[(i + n) * m + j] = y;
            }
        }
        let value = min_symmetric_eigenvalue(emb, m, EIGEN_TOL)?;
        if (value - reference).abs() > SYMBOL_TOL * reference.abs().max(1.0) {
            return Err(Error::Numeric(format!(
                "symbol at lambda = {lambda} gives {value}, coercivity gives {reference}"
            )));
        }
        Ok(value)
    })?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

/// True iff `Im R(z) ≥ -1e-14` at every sample of the open upper half-plane.
pub fn nevanlinna_check(spec: &NevanlinnaSpec, samples: &[Complex64]) -> Result<bool> {
    nevanlinna_check_with(Execution::Sequential, spec, samples)
}

pub fn nevanlinna_check_with(exec: Execution, spec: &NevanlinnaSpec, samples: &[Complex64]) -> Result<bool> {
    if let Some(z) = samples.iter().find(|z| !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidSample(format!("{z} is not in the open upper half-plane")));
    }
    Ok(exec.all(samples, |z| spec.eval(*z).im >= -NEVANLINNA_TOL))
}
