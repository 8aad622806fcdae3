//! Compressed sparse storage and the sparse kernels the update algorithms
//! are built on. Matrices are stored column-major as an array of sparse
//! columns, so appending a column and iterating one column are both cheap.

use crate::dense::{DenseTallMatrix, SmallDense};
use crate::LinAlgError;

/// Default drop tolerance: only exact zeros are removed from storage.
pub const DEFAULT_DROP_TOL: f64 = 0.0;

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Empty vector of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self { dim, indices: Vec::new(), values: Vec::new() }
    }

    /// Single-entry vector.
    pub fn unit(dim: usize, index: usize, value: f64) -> Self {
        assert!(index < dim, "index {index} out of range for dim {dim}");
        if value.abs() <= DEFAULT_DROP_TOL {
            return Self::zeros(dim);
        }
        Self { dim, indices: vec![index], values: vec![value] }
    }

    /// Build from (index, value) pairs. Pairs are sorted, duplicate indices
    /// are summed, and values with magnitude at or below `drop_tol` are
    /// removed.
    pub fn from_pairs_tol(dim: usize, pairs: &[(usize, f64)], drop_tol: f64) -> Self {
        let mut sorted: Vec<(usize, f64)> = pairs.to_vec();
        sorted.sort_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        for (i, v) in sorted {
            assert!(i < dim, "index {i} out of range for dim {dim}");
            if let Some(&last) = indices.last() {
                if last == i {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            indices.push(i);
            values.push(v);
        }
        let mut out = Self { dim, indices, values };
        out.drop_small(drop_tol);
        out
    }

    pub fn from_pairs(dim: usize, pairs: &[(usize, f64)]) -> Self {
        Self::from_pairs_tol(dim, pairs, DEFAULT_DROP_TOL)
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let pairs: Vec<(usize, f64)> = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > DEFAULT_DROP_TOL)
            .map(|(i, &v)| (i, v))
            .collect();
        Self::from_pairs(dense.len(), &pairs)
    }

    fn drop_small(&mut self, tol: f64) {
        if self.values.iter().all(|v| v.abs() > tol) {
            return;
        }
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            if v.abs() > tol {
                indices.push(i);
                values.push(v);
            }
        }
        self.indices = indices;
        self.values = values;
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = 0.0;
        let (mut a, mut b) = (0, 0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        if alpha == 0.0 {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out.drop_small(DEFAULT_DROP_TOL);
        out
    }

    /// `self + alpha * other` with merged sparsity.
    pub fn add_scaled(&self, alpha: f64, other: &SparseVector) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        let (mut a, mut b) = (0, 0);
        while a < self.indices.len() || b < other.indices.len() {
            let ia = self.indices.get(a).copied().unwrap_or(usize::MAX);
            let ib = other.indices.get(b).copied().unwrap_or(usize::MAX);
            let (i, v) = if ia < ib {
                a += 1;
                (ia, self.values[a - 1])
            } else if ib < ia {
                b += 1;
                (ib, alpha * other.values[b - 1])
            } else {
                a += 1;
                b += 1;
                (ia, self.values[a - 1] + alpha * other.values[b - 1])
            };
            if v.abs() > DEFAULT_DROP_TOL {
                indices.push(i);
                values.push(v);
            }
        }
        Self { dim: self.dim, indices, values }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// Sparse matrix in compressed-column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, columns: vec![SparseVector::zeros(rows); cols] }
    }

    /// Assemble from columns; every column must have dimension `rows`.
    pub fn from_columns(rows: usize, columns: Vec<SparseVector>) -> Self {
        for c in &columns {
            assert_eq!(c.dim(), rows, "column dimension mismatch");
        }
        let cols = columns.len();
        Self { rows, cols, columns }
    }

    /// Assemble from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols];
        for &(r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r},{c}) out of range");
            per_col[c].push((r, v));
        }
        let columns = per_col
            .into_iter()
            .map(|pairs| SparseVector::from_pairs(rows, &pairs))
            .collect();
        Self { rows, cols, columns }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseVector::nnz).sum()
    }

    #[inline]
    pub fn col(&self, j: usize) -> &SparseVector {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVector] {
        &self.columns
    }

    pub fn push_column(&mut self, col: SparseVector) {
        assert_eq!(col.dim(), self.rows, "column dimension mismatch");
        self.columns.push(col);
        self.cols += 1;
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.iter().map(move |(i, v)| (i, j, v)))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.rows];
        for (i, j, v) in self.iter_entries() {
            per_col[i].push((j, v));
        }
        let columns = per_col
            .into_iter()
            .map(|pairs| SparseVector::from_pairs(self.cols, &pairs))
            .collect();
        SparseMatrix { rows: self.cols, cols: self.rows, columns }
    }

    /// Extract the sub-matrix of the given half-open row and column ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> SparseMatrix {
        assert!(rows.end <= self.rows && cols.end <= self.cols, "block out of range");
        let nr = rows.len();
        let columns: Vec<SparseVector> = self.columns[cols]
            .iter()
            .map(|c| {
                let pairs: Vec<(usize, f64)> = c
                    .iter()
                    .filter(|(i, _)| rows.contains(i))
                    .map(|(i, v)| (i - rows.start, v))
                    .collect();
                SparseVector::from_pairs(nr, &pairs)
            })
            .collect();
        let ncols = columns.len();
        SparseMatrix { rows: nr, cols: ncols, columns }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.columns.iter().map(SparseVector::norm_sq).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> SmallDense {
        let mut out = SmallDense::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter_entries() {
            out.set(i, j, v);
        }
        out
    }
}

/// `Mᵀ X` computed by gathering only the rows of `X` that carry a nonzero of
/// the corresponding column of `M`. Cost is proportional to `nnz(M) * X.cols`.
pub fn spmv_transpose(m: &SparseMatrix, x: &DenseTallMatrix) -> Result<SmallDense, LinAlgError> {
    if m.rows() != x.rows() {
        return Err(LinAlgError::Shape(format!(
            "spmv_transpose: matrix has {} rows, dense factor has {}",
            m.rows(),
            x.rows()
        )));
    }
    let k = x.cols();
    let mut out = SmallDense::zeros(m.cols(), k);
    for (j, col) in m.columns().iter().enumerate() {
        let dst = out.row_mut(j);
        for (i, v) in col.iter() {
            let src = x.row(i);
            for (d, s) in dst.iter_mut().zip(src) {
                *d += v * s;
            }
        }
    }
    Ok(out)
}

/// `Y += B W`, touching only the rows of `Y` where `B` has a nonzero.
/// Cost is proportional to `nnz(B) * W.cols`.
pub fn sparse_axpy_block(
    y: &mut DenseTallMatrix,
    b: &SparseMatrix,
    w: &SmallDense,
) -> Result<(), LinAlgError> {
    if y.rows() != b.rows() {
        return Err(LinAlgError::Shape(format!(
            "sparse_axpy_block: dense target has {} rows, sparse block has {}",
            y.rows(),
            b.rows()
        )));
    }
    if b.cols() != w.rows() {
        return Err(LinAlgError::Shape(format!(
            "sparse_axpy_block: sparse block has {} cols, weight block has {} rows",
            b.cols(),
            w.rows()
        )));
    }
    if w.cols() != y.cols() {
        return Err(LinAlgError::Shape(format!(
            "sparse_axpy_block: weight block has {} cols, dense target has {}",
            w.cols(),
            y.cols()
        )));
    }
    for (j, col) in b.columns().iter().enumerate() {
        let wrow = w.row(j);
        for (i, v) in col.iter() {
            let dst = y.row_mut(i);
            for (d, s) in dst.iter_mut().zip(wrow) {
                *d += v * s;
            }
        }
    }
    Ok(())
}
