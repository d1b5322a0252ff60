//! LU factorization with partial pivoting for matrices that are banded
//! after a symmetric reordering of the unknowns.

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Row-major band storage. Row `i` holds columns `i - kl ..= i + kl + ku`,
/// the extra `kl` upper diagonals absorbing fill from row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    pivots: Vec<usize>,
    /// `order[k]` is the original index of permuted unknown `k`.
    order: Vec<usize>,
}

impl BandedLu {
    /// Factors `a` after reordering rows and columns by `order` (identity
    /// when `None`). Fails if a pivot is negligible relative to the largest
    /// entry.
    pub fn factor(a: &SparseMatrix, order: Option<&[usize]>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dim(a.nrows(), a.ncols()));
        }
        if !a.is_finite() {
            return Err(Error::Numeric("matrix has non-finite entries".into()));
        }
        let n = a.nrows();
        let order: Vec<usize> = match order {
            Some(o) => {
                let mut seen = vec![false; n];
                if o.len() != n || o.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
                    return Err(Error::Parameter("ordering is not a permutation".into()));
                }
                o.to_vec()
            }
            None => (0..n).collect(),
        };
        let mut inverse = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            inverse[i] = k;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inverse[i], inverse[j]);
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            width,
            band: vec![0.0; n * width],
            pivots: vec![0; n],
            order,
        };
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inverse[i], inverse[j]);
            let slot = lu.slot(pi, pj);
            lu.band[slot] = v;
        }
        let tol = a.max_abs() * f64::EPSILON * n.max(1) as f64;
        lu.eliminate(tol)?;
        Ok(lu)
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    fn eliminate(&mut self, tol: f64) -> Result<()> {
        let n = self.n;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.kl + self.ku).min(n - 1);
            let mut p = k;
            let mut best = self.band[self.slot(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.band[self.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tol) {
                return Err(Error::IllPosed(format!(
                    "singular matrix: pivot {best:e} at elimination step {k}"
                )));
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.slot(k, j), self.slot(p, j));
                    self.band.swap(a, b);
                }
            }
            let pivot = self.band[self.slot(k, k)];
            for i in k + 1..=last_row {
                let sik = self.slot(i, k);
                let l = self.band[sik] / pivot;
                self.band[sik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let u = self.band[self.slot(k, j)];
                        let sij = self.slot(i, j);
                        self.band[sij] -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower and upper bandwidth of the reordered matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(rhs, &mut x);
        x
    }

    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        assert_eq!(out.len(), n);
        let mut b: Vec<f64> = self.order.iter().map(|&i| rhs[i]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.band[self.slot(i, k)] * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                acc -= self.band[self.slot(i, j)] * b[j];
            }
            b[i] = acc / self.band[self.slot(i, i)];
        }
        for (k, &i) in self.order.iter().enumerate() {
            out[i] = b[k];
        }
    }
}
