use crate::error::{Error, Result};

/// Compressed sparse row matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut rows = Vec::with_capacity(sorted.len());
        for (i, j, v) in sorted {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) outside {nrows}x{ncols}");
            if rows.last() == Some(&i) && col_idx.last() == Some(&j) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                col_idx.push(j);
                vals.push(v);
            }
        }
        let keep: Vec<bool> = vals.iter().map(|v| *v != 0.0).collect();
        let mut k = 0;
        rows.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        k = 0;
        col_idx.retain(|_| {
            k += 1;
            keep[k - 1]
        });
        vals.retain(|v| *v != 0.0);
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_triplets(nrows, ncols, &[])
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, v)| (i, i, *v)).collect();
        Self::from_triplets(d.len(), d.len(), &t)
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols, "ragged dense matrix");
            for (j, v) in r.iter().enumerate() {
                t.push((i, j, *v));
            }
        }
        Self::from_triplets(rows.len(), ncols, &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Nonzeros of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(out.len(), self.nrows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn try_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::dim(self.ncols, x.len()));
        }
        Ok(self.mul_vec(x))
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale(&self, left: &[f64], right: &[f64]) -> Self {
        assert_eq!(left.len(), self.nrows);
        assert_eq!(right.len(), self.ncols);
        let t: Vec<_> = self
            .triplets()
            .map(|(i, j, v)| (i, j, left[i] * v * right[j]))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (i, j, alpha * v)).collect();
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// `self + alpha · other`.
    pub fn add_scaled(&self, other: &SparseMatrix, alpha: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t: Vec<_> = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, alpha * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.vals.iter().all(|v| v.is_finite())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &j) in cols.iter().enumerate() {
            col_map[j] = k;
        }
        let mut t = Vec::new();
        for (ri, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if col_map[j] != usize::MAX {
                    t.push((ri, col_map[j], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), &t)
    }
}

/// Accumulates triplets, typically block by block.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            triplets: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        self.triplets.push((i, j, v));
    }

    pub fn add_block(&mut self, row_offset: usize, col_offset: usize, block: &SparseMatrix, scale: f64) {
        for (i, j, v) in block.triplets() {
            self.triplets.push((row_offset + i, col_offset + j, scale * v));
        }
    }

    pub fn build(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.nrows, self.ncols, &self.triplets)
    }
}
