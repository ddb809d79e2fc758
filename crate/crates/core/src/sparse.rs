//! Compressed sparse row matrices with the handful of operations the
//! assembly and eigensolver need.

use crate::{Error, Result};

/// A real CSR matrix. Column indices are sorted within each row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

/// Coordinate-format accumulator. Duplicate entries are summed in
/// insertion order when converted, so conversion is deterministic.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Triplets { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Triplets { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        // stable sort keeps insertion order among duplicates
        order.sort_by_key(|&k| (self.entries[k].0, self.entries[k].1));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(order.len());
        let mut data: Vec<f64> = Vec::with_capacity(order.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (i, j, v) = self.entries[k];
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![1.0; n],
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::identity(d.len());
        m.data.copy_from_slice(d);
        m
    }

    /// Builds a matrix from a dense row-major slice, dropping exact zeros.
    pub fn from_dense(nrows: usize, ncols: usize, a: &[f64]) -> Self {
        let mut t = Triplets::new(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                let v = a[i * ncols + j];
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        t.to_csr()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Iterates `(column, value)` over row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.data[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                a[i * self.ncols + j] = v;
            }
        }
        a
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.nrows {
            let mut row = 0.0;
            for (j, v) in self.row(i) {
                row += v * x[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// `|x|ᵀ |A| |x|`, the scale of the rounding error in [`Self::quadratic_form`].
    pub fn abs_quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.nrows).map(|i| x[i].abs() * self.row(i).map(|(j, v)| (v * x[j]).abs()).sum::<f64>()).sum()
    }

    pub fn max_row_nnz(&self) -> usize {
        self.indptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Triplets::with_capacity(self.ncols, self.nrows, self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                t.push(j, i, v);
            }
        }
        t.to_csr()
    }

    pub fn scale(&self, alpha: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= alpha);
        m
    }

    /// `Σ_k coeffs[k] · terms[k]`, summed entry-wise in the given order.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> Result<CsrMatrix> {
        let first = terms.first().ok_or_else(|| Error::InvalidInput("empty combination".into()))?.1;
        let (nr, nc) = (first.nrows, first.ncols);
        let mut cap = 0;
        for (_, m) in terms {
            if m.nrows != nr || m.ncols != nc {
                return Err(Error::DimensionMismatch { expected: nr, got: m.nrows });
            }
            cap += m.nnz();
        }
        let mut t = Triplets::with_capacity(nr, nc, cap);
        // row-major traversal keeps the per-entry summation order fixed
        for i in 0..nr {
            for (c, m) in terms {
                for (j, v) in m.row(i) {
                    t.push(i, j, c * v);
                }
            }
        }
        Ok(t.to_csr())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CsrMatrix) -> CsrMatrix {
        let nr = self.nrows * other.nrows;
        let nc = self.ncols * other.ncols;
        let mut t = Triplets::with_capacity(nr, nc, self.nnz() * other.nnz());
        for i in 0..self.nrows {
            for (j, a) in self.row(i) {
                for p in 0..other.nrows {
                    for (q, b) in other.row(p) {
                        t.push(i * other.nrows + p, j * other.ncols + q, a * b);
                    }
                }
            }
        }
        t.to_csr()
    }

    /// Principal submatrix on the kept index list (ascending).
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.ncols.max(self.nrows)];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = Triplets::new(keep.len(), keep.len());
        for (new_i, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                let nj = map[j];
                if nj != usize::MAX {
                    t.push(new_i, nj, v);
                }
            }
        }
        t.to_csr()
    }

    /// True when `A[i][j]` and `A[j][i]` are bitwise equal for all entries.
    pub fn is_symmetric(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                if self.get(j, i).to_bits() != v.to_bits() {
                    return false;
                }
            }
        }
        true
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(n: usize) -> CsrMatrix {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        t.to_csr()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 1, 2.0);
        t.push(0, 0, 3.0);
        let m = t.to_csr();
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn kron_matches_dense_definition() {
        let a = tri(3);
        let b = CsrMatrix::from_dense(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let k = a.kron(&b);
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for i in 0..3 {
            for j in 0..3 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k.get(i * 2 + p, j * 2 + q), ad[i * 3 + j] * bd[p * 2 + q]);
                    }
                }
            }
        }
    }

    #[test]
    fn restrict_and_quadratic_form() {
        let a = tri(5);
        let r = a.restrict(&[1, 2, 3]);
        assert_eq!(r.to_dense(), tri(3).to_dense());
        let x = [1.0, 2.0, 3.0];
        assert_eq!(r.quadratic_form(&x), dot(&x, &r.mul_vec(&x)));
        assert!(r.is_symmetric());
    }

    #[test]
    fn linear_combination_rejects_mismatch() {
        let a = tri(3);
        let b = tri(4);
        assert!(CsrMatrix::linear_combination(&[(1.0, &a), (1.0, &b)]).is_err());
        let c = CsrMatrix::linear_combination(&[(1.0, &a), (-2.0, &a)]).unwrap();
        assert_eq!(c.get(0, 0), -2.0);
    }
}
