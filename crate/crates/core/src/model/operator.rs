use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::basis::BasisTag;
use crate::error::{Error, Result};

/// Real sparse matrix in CSR form, acting on one [`Basis`](super::Basis).
///
/// Every operator built in this crate is real symmetric, so the Hermitian
/// closure of an entry `(i, j, v)` is `(j, i, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    tag: BasisTag,
}

impl SparseOperator {
    /// Duplicate `(row, col)` entries are summed; exact zeros are dropped.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)], tag: BasisTag) -> Self {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); dim];
        for &(r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) out of range for dim {dim}");
            *rows[r].entry(c).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator { dim, row_ptr, col_idx, values, tag }
    }

    pub fn diagonal(diag: &[f64], tag: BasisTag) -> Self {
        let t: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(diag.len(), &t, tag)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[a..b].binary_search(&j) {
            Ok(k) => self.values[a + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.dim).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    /// `y = A x`
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.col_idx[k]] * self.values[k];
            }
            *yi = acc;
        }
    }

    pub fn apply_new(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        y
    }

    /// `<x|A|x>` (real for symmetric `A`).
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let y = self.apply_new(x);
        crate::state::inner(x, &y).re
    }

    /// Exact symmetry check; reports the worst offending pair.
    pub fn check_hermitian(&self) -> Result<()> {
        let mut worst = (0, 0, 0.0);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                let d = (v - self.get(j, i)).abs();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        if worst.2 > 0.0 {
            return Err(Error::NotHermitian { row: worst.0, col: worst.1, defect: worst.2 });
        }
        Ok(())
    }

    pub fn is_hermitian(&self) -> bool {
        self.check_hermitian().is_ok()
    }

    /// Max absolute row sum; an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn matmul(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut t = Vec::new();
        for i in 0..self.dim {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    *acc.entry(j).or_insert(0.0) += a * b;
                }
            }
            t.extend(acc.into_iter().map(|(j, v)| (i, j, v)));
        }
        SparseOperator::from_triplets(self.dim, &t, self.tag)
    }

    /// `a * self + b * other`
    pub fn linear_combination(&self, a: f64, other: &SparseOperator, b: f64) -> SparseOperator {
        assert_eq!(self.dim, other.dim);
        let mut t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (i, j, a * v)).collect();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, b * v)));
        SparseOperator::from_triplets(self.dim, &t, self.tag)
    }

    /// Largest absolute entry of `[self, other]`.
    pub fn commutator_max_abs(&self, other: &SparseOperator) -> f64 {
        let c = self.matmul(other).linear_combination(1.0, &other.matmul(self), -1.0);
        c.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Copy with `value` added to diagonal entry `index`.
    pub fn with_diagonal_shift(&self, index: usize, value: f64) -> SparseOperator {
        let mut t = self.triplets();
        t.push((index, index, value));
        SparseOperator::from_triplets(self.dim, &t, self.tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, Sector};

    fn tag() -> BasisTag {
        BasisTag { half_length: 1, sector: Sector::One, kind: ModelKind::Spin }
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let a = SparseOperator::from_triplets(2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 0.0)], tag());
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.nnz(), 2);
        assert!(a.is_hermitian());
    }

    #[test]
    fn asymmetric_is_rejected() {
        let a = SparseOperator::from_triplets(2, &[(0, 1, 1.0), (1, 0, 0.5)], tag());
        assert!(matches!(a.check_hermitian(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn matvec_matches_dense() {
        let a = SparseOperator::from_triplets(
            3,
            &[(0, 1, 1.0), (1, 0, 1.0), (2, 2, -2.0), (0, 2, 0.5), (2, 0, 0.5)],
            tag(),
        );
        let x = [C64::new(1.0, 2.0), C64::new(-1.0, 0.0), C64::new(0.0, 3.0)];
        let y = a.apply_new(&x);
        let d = a.to_dense();
        for i in 0..3 {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..3 {
                acc += x[j] * d[(i, j)];
            }
            assert!((acc - y[i]).norm() < 1e-15);
        }
    }
}
