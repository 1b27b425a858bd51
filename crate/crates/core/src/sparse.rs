//! Square CSR sparse matrices. Products accumulate sequentially in stored
//! order, so results are bit-reproducible for a fixed matrix.

use num_complex::Complex;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square sparse matrix in CSR layout. Column indices are strictly
/// increasing within each row and every stored value is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds an `n x n` matrix from triplets. Duplicates are summed;
    /// entries that cancel to exactly zero are dropped.
    pub fn from_coo(n: usize, triplets: &[(usize, usize, T)]) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= n {
                return Err(Error::IndexOutOfRange { index: r, n });
            }
            if c >= n {
                return Err(Error::IndexOutOfRange { index: c, n });
            }
        }
        let mut sorted: Vec<(usize, usize, T)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut it = sorted.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if v == T::zero() {
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix { n, row_ptr, col_idx, values })
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates stored entries as `(row, col, value)` in CSR order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    /// `y = A x`. Sequential accumulation in stored order.
    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut y = vec![T::zero(); self.n];
        for r in 0..self.n {
            let mut acc = T::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        Ok(y)
    }

    /// `y = A x` for a complex vector; the matrix stays real.
    pub fn spmv_complex(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.n];
        for r in 0..self.n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.values[k];
                let xc = x[self.col_idx[k]];
                acc.re += v * xc.re;
                acc.im += v * xc.im;
            }
            y[r] = acc;
        }
        Ok(y)
    }

    /// Column sums as a dense vector.
    pub fn col_sums(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.n];
        for k in 0..self.values.len() {
            s[self.col_idx[k]] += self.values[k];
        }
        s
    }

    /// Dense copy, for oracles and small diagnostics.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.triplets() {
            a[(r, c)] = v;
        }
        a
    }

    /// `A + s I` as a new matrix; used to form shifted systems like
    /// `I - A` without a general sparse add.
    pub fn add_scaled_identity(&self, s: T) -> Result<Self> {
        let mut trips: Vec<(usize, usize, T)> = self.triplets().collect();
        for i in 0..self.n {
            trips.push((i, i, s));
        }
        Self::from_coo(self.n, &trips)
    }

    /// Rescales every stored value.
    pub fn scale(&mut self, s: T) {
        for v in &mut self.values {
            *v *= s;
        }
        self.values.retain(|v| *v != T::zero());
        // Scaling by a finite factor cannot zero a nonzero IEEE value unless
        // s == 0; rebuild pointers only in that degenerate case.
        if self.values.len() != self.col_idx.len() {
            let trips: Vec<(usize, usize, T)> = Vec::new();
            *self = Self::from_coo(self.n, &trips).unwrap();
        }
    }
}
