//! Dense matrix types: small square/rectangular blocks of size O((k+s)^2)
//! and tall-and-skinny factors with O(m) rows. Both are row-major.

use crate::LinAlgError;

/// Column norm below `QR_RANK_TOL * (input column norm)` is treated as rank
/// deficient during Gram-Schmidt: the column is zeroed and the corresponding
/// diagonal entry of R is set to 0.
pub const QR_RANK_TOL: f64 = 1e-10;

/// A second orthogonalization pass runs when the largest off-diagonal entry
/// of the Q Gram matrix exceeds this threshold after the first sweep.
pub const QR_REORTH_TRIGGER: f64 = 1e-8;

/// Condition estimate above which an inverse is refused.
pub const SINGULAR_COND_LIMIT: f64 = 1e12;

/// Small dense matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct SmallDense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SmallDense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinAlgError> {
        if data.len() != rows * cols {
            return Err(LinAlgError::Shape(format!(
                "SmallDense: {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &SmallDense) -> Result<SmallDense, LinAlgError> {
        if self.cols != other.rows {
            return Err(LinAlgError::Shape(format!(
                "matmul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = SmallDense::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = out.row_mut(i);
            for (p, &a) in arow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let brow = other.row(p);
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ * other`.
    pub fn matmul_tn(&self, other: &SmallDense) -> Result<SmallDense, LinAlgError> {
        self.transpose().matmul(other)
    }

    /// `self * otherᵀ`.
    pub fn matmul_nt(&self, other: &SmallDense) -> Result<SmallDense, LinAlgError> {
        self.matmul(&other.transpose())
    }

    /// Copy of the sub-matrix at the given half-open ranges.
    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> SmallDense {
        assert!(rows.end <= self.rows && cols.end <= self.cols, "block out of range");
        let mut out = SmallDense::zeros(rows.len(), cols.len());
        for (oi, i) in rows.enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out.set(oi, oj, self.get(i, j));
            }
        }
        out
    }

    /// Stack `top` over `bottom`.
    pub fn vstack(top: &SmallDense, bottom: &SmallDense) -> SmallDense {
        assert_eq!(top.cols, bottom.cols, "vstack column mismatch");
        let mut data = Vec::with_capacity((top.rows + bottom.rows) * top.cols);
        data.extend_from_slice(&top.data);
        data.extend_from_slice(&bottom.data);
        SmallDense { rows: top.rows + bottom.rows, cols: top.cols, data }
    }

    /// Place `left` beside `right`.
    pub fn hstack(left: &SmallDense, right: &SmallDense) -> SmallDense {
        assert_eq!(left.rows, right.rows, "hstack row mismatch");
        let mut out = SmallDense::zeros(left.rows, left.cols + right.cols);
        for i in 0..left.rows {
            out.row_mut(i)[..left.cols].copy_from_slice(left.row(i));
            out.row_mut(i)[left.cols..].copy_from_slice(right.row(i));
        }
        out
    }

    pub fn add(&self, other: &SmallDense) -> SmallDense {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        SmallDense { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &SmallDense) -> SmallDense {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        SmallDense { rows: self.rows, cols: self.cols, data }
    }

    /// `self * diag(d)`.
    pub fn mul_diag_right(&self, d: &[f64]) -> SmallDense {
        assert_eq!(self.cols, d.len());
        let mut out = self.clone();
        for i in 0..out.rows {
            for (v, &s) in out.row_mut(i).iter_mut().zip(d) {
                *v *= s;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SmallDense) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest absolute deviation of `selfᵀ self` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.matmul_tn(self).expect("square product");
        let mut err = 0.0_f64;
        for i in 0..g.rows {
            for j in 0..g.cols {
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((g.get(i, j) - want).abs());
            }
        }
        err
    }

    fn norm1(&self) -> f64 {
        let mut best = 0.0_f64;
        for j in 0..self.cols {
            let s: f64 = (0..self.rows).map(|i| self.get(i, j).abs()).sum();
            best = best.max(s);
        }
        best
    }

    /// Inverse by LU with partial pivoting, plus a 1-norm condition estimate.
    /// Refuses matrices whose condition estimate exceeds
    /// [`SINGULAR_COND_LIMIT`].
    pub fn inverse_with_cond(&self) -> Result<(SmallDense, f64), LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::Shape(format!(
                "inverse of non-square {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok((SmallDense::zeros(0, 0), 1.0));
        }
        if !self.is_finite() {
            return Err(LinAlgError::Numeric("inverse of non-finite matrix".into()));
        }
        // LU factorization of a working copy, augmented with the identity.
        let mut lu = self.clone();
        let mut inv = SmallDense::identity(n);
        for col in 0..n {
            let mut piv = col;
            let mut best = lu.get(col, col).abs();
            for r in col + 1..n {
                let v = lu.get(r, col).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Err(LinAlgError::Singular { cond: f64::INFINITY });
            }
            if piv != col {
                for j in 0..n {
                    let a = lu.get(col, j);
                    lu.set(col, j, lu.get(piv, j));
                    lu.set(piv, j, a);
                    let b = inv.get(col, j);
                    inv.set(col, j, inv.get(piv, j));
                    inv.set(piv, j, b);
                }
            }
            let d = lu.get(col, col);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = lu.get(r, col) / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = lu.get(r, j) - f * lu.get(col, j);
                    lu.set(r, j, v);
                }
                for j in 0..n {
                    let v = inv.get(r, j) - f * inv.get(col, j);
                    inv.set(r, j, v);
                }
            }
        }
        for r in 0..n {
            let d = lu.get(r, r);
            for j in 0..n {
                let v = inv.get(r, j) / d;
                inv.set(r, j, v);
            }
        }
        let cond = self.norm1() * inv.norm1();
        if !cond.is_finite() || cond > SINGULAR_COND_LIMIT {
            return Err(LinAlgError::Singular { cond });
        }
        Ok((inv, cond))
    }

    /// Modified Gram-Schmidt QR over the columns, with the shared
    /// rank-deficiency policy and conditional reorthogonalization.
    pub fn mgs_qr(&self) -> (SmallDense, SmallDense) {
        let mut cols: Vec<Vec<f64>> =
            (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).collect()).collect();
        let r = mgs_columns(&mut cols);
        let mut q = SmallDense::zeros(self.rows, self.cols);
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                q.set(i, j, v);
            }
        }
        (q, r)
    }
}

/// In-place modified Gram-Schmidt on a set of dense columns. Returns R.
/// Columns whose residual norm falls below `QR_RANK_TOL` times their input
/// norm are zeroed with a zero R diagonal. A second pass runs when the Gram
/// matrix of Q drifts beyond `QR_REORTH_TRIGGER`; its R factor is folded in.
pub(crate) fn mgs_columns(cols: &mut [Vec<f64>]) -> SmallDense {
    let r1 = mgs_sweep(cols);
    if gram_offdiag_max(cols) > QR_REORTH_TRIGGER {
        let r2 = mgs_sweep(cols);
        return r2.matmul(&r1).expect("square R factors");
    }
    r1
}

fn mgs_sweep(cols: &mut [Vec<f64>]) -> SmallDense {
    let s = cols.len();
    let mut r = SmallDense::zeros(s, s);
    let norms0: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    for i in 0..s {
        let alpha = dot(&cols[i], &cols[i]).sqrt();
        if alpha <= QR_RANK_TOL * norms0[i] {
            cols[i].iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        r.set(i, i, alpha);
        cols[i].iter_mut().for_each(|v| *v /= alpha);
        let (head, tail) = cols.split_at_mut(i + 1);
        let qi = &head[i];
        for (off, cj) in tail.iter_mut().enumerate() {
            let beta = dot(qi, cj);
            r.set(i, i + 1 + off, beta);
            for (c, &q) in cj.iter_mut().zip(qi) {
                *c -= beta * q;
            }
        }
    }
    r
}

fn gram_offdiag_max(cols: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            worst = worst.max(dot(&cols[i], &cols[j]).abs());
        }
    }
    worst
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Tall dense matrix (row-major) with cheap row access and amortized O(1)
/// row appends. Row count may be large; column count stays O(k).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTallMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseTallMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinAlgError> {
        if data.len() != rows * cols {
            return Err(LinAlgError::Shape(format!(
                "DenseTallMatrix: {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_small(m: &SmallDense) -> Self {
        Self { rows: m.rows(), cols: m.cols(), data: m.data().to_vec() }
    }

    pub fn from_sparse(m: &crate::sparse::SparseMatrix) -> Self {
        let mut out = Self::zeros(m.rows(), m.cols());
        for (i, j, v) in m.iter_entries() {
            out.set(i, j, v);
        }
        out
    }

    pub fn to_small(&self) -> SmallDense {
        SmallDense { rows: self.rows, cols: self.cols, data: self.data.clone() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn append_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "appended row width mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn iter_all(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }

    pub fn row_major_data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * w` where `w` is small. Row-parallel friendly memory order.
    pub fn matmul_small(&self, w: &SmallDense) -> Result<DenseTallMatrix, LinAlgError> {
        if self.cols != w.rows() {
            return Err(LinAlgError::Shape(format!(
                "matmul_small: {}x{} by {}x{}",
                self.rows,
                self.cols,
                w.rows(),
                w.cols()
            )));
        }
        let q = w.cols();
        let mut out = DenseTallMatrix::zeros(self.rows, q);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = out.row_mut(i);
            for (p, &a) in arow.iter().enumerate() {
                let wrow = w.row(p);
                for (o, &b) in orow.iter_mut().zip(wrow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self += other * w`.
    pub fn add_matmul_small(
        &mut self,
        other: &DenseTallMatrix,
        w: &SmallDense,
    ) -> Result<(), LinAlgError> {
        if other.cols != w.rows() || other.rows != self.rows || w.cols() != self.cols {
            return Err(LinAlgError::Shape(format!(
                "add_matmul_small: {}x{} += {}x{} * {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols,
                w.rows(),
                w.cols()
            )));
        }
        for i in 0..self.rows {
            let arow = other.row(i);
            let orow = self.row_mut(i);
            for (p, &a) in arow.iter().enumerate() {
                let wrow = w.row(p);
                for (o, &b) in orow.iter_mut().zip(wrow) {
                    *o += a * b;
                }
            }
        }
        Ok(())
    }

    /// Gram matrix `selfᵀ self` (cols x cols).
    pub fn gram(&self) -> SmallDense {
        let k = self.cols;
        let mut g = SmallDense::zeros(k, k);
        for i in 0..self.rows {
            let row = self.row(i);
            for a in 0..k {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                let grow = g.row_mut(a);
                for b in 0..k {
                    grow[b] += ra * row[b];
                }
            }
        }
        g
    }

    /// `selfᵀ * other` for two tall matrices with equal row counts.
    pub fn xt_y(&self, other: &DenseTallMatrix) -> Result<SmallDense, LinAlgError> {
        if self.rows != other.rows {
            return Err(LinAlgError::Shape(format!(
                "xt_y: {} rows vs {} rows",
                self.rows, other.rows
            )));
        }
        let mut g = SmallDense::zeros(self.cols, other.cols);
        for i in 0..self.rows {
            let ra = self.row(i);
            let rb = other.row(i);
            for (a, &va) in ra.iter().enumerate() {
                if va == 0.0 {
                    continue;
                }
                let grow = g.row_mut(a);
                for (gv, &vb) in grow.iter_mut().zip(rb) {
                    *gv += va * vb;
                }
            }
        }
        Ok(g)
    }

    /// Largest absolute deviation of `selfᵀ self` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.gram();
        let mut err = 0.0_f64;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((g.get(i, j) - want).abs());
            }
        }
        err
    }

    pub fn hstack(left: &DenseTallMatrix, right: &DenseTallMatrix) -> DenseTallMatrix {
        assert_eq!(left.rows, right.rows, "hstack row mismatch");
        let mut out = DenseTallMatrix::zeros(left.rows, left.cols + right.cols);
        for i in 0..left.rows {
            out.row_mut(i)[..left.cols].copy_from_slice(left.row(i));
            out.row_mut(i)[left.cols..].copy_from_slice(right.row(i));
        }
        out
    }

    pub fn vstack(top: &DenseTallMatrix, bottom: &DenseTallMatrix) -> DenseTallMatrix {
        assert_eq!(top.cols, bottom.cols, "vstack column mismatch");
        let mut data = Vec::with_capacity((top.rows + bottom.rows) * top.cols);
        data.extend_from_slice(&top.data);
        data.extend_from_slice(&bottom.data);
        DenseTallMatrix { rows: top.rows + bottom.rows, cols: top.cols, data }
    }

    /// Columns as contiguous vectors (tiled transpose).
    pub fn to_cols(&self) -> Vec<Vec<f64>> {
        let mut cols = vec![vec![0.0; self.rows]; self.cols];
        const TILE: usize = 64;
        for i0 in (0..self.rows).step_by(TILE) {
            let i1 = (i0 + TILE).min(self.rows);
            for i in i0..i1 {
                let row = self.row(i);
                for (j, &v) in row.iter().enumerate() {
                    cols[j][i] = v;
                }
            }
        }
        cols
    }

    pub fn from_cols(rows: usize, cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let mut out = Self::zeros(rows, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, &v) in col.iter().enumerate() {
                out.set(i, j, v);
            }
        }
        out
    }

    /// Thin QR via modified Gram-Schmidt with the shared policies. The
    /// returned Q has the shape of `self`; R is cols x cols upper triangular
    /// with nonnegative diagonal.
    pub fn mgs_qr(&self) -> (DenseTallMatrix, SmallDense) {
        let mut cols = self.to_cols();
        let r = mgs_columns(&mut cols);
        (DenseTallMatrix::from_cols(self.rows, &cols), r)
    }

    /// Sum of `v[i] * row(i)` over the nonzeros of a sparse vector.
    pub fn gather_transpose_vec(&self, b: &crate::sparse::SparseVector) -> Vec<f64> {
        debug_assert_eq!(b.dim(), self.rows);
        let mut acc = vec![0.0; self.cols];
        for (i, v) in b.iter() {
            for (a, &x) in acc.iter_mut().zip(self.row(i)) {
                *a += v * x;
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &DenseTallMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded_gaussian_small, seeded_gaussian_tall};

    #[test]
    fn inverse_identity_and_diagonal() {
        let id = SmallDense::identity(4);
        let (inv, cond) = id.inverse_with_cond().unwrap();
        assert!(inv.max_abs_diff(&id) == 0.0);
        assert!((cond - 1.0).abs() < 1e-12);

        let d = SmallDense::diag(&[2.0, 4.0]);
        let (inv, _) = d.inverse_with_cond().unwrap();
        assert!((inv.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((inv.get(1, 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inverse_multiply_back() {
        let m = seeded_gaussian_small(6, 6, 42);
        let (inv, cond) = m.inverse_with_cond().unwrap();
        let prod = m.matmul(&inv).unwrap();
        let err = prod.max_abs_diff(&SmallDense::identity(6));
        assert!(err <= 1e-9 * cond.max(1.0), "inverse error {err}, cond {cond}");
        let prod2 = inv.matmul(&m).unwrap();
        let err2 = prod2.max_abs_diff(&SmallDense::identity(6));
        assert!(err2 <= 1e-9 * cond.max(1.0));
    }

    #[test]
    fn inverse_rejects_singular() {
        let m = SmallDense::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(m.inverse_with_cond(), Err(LinAlgError::Singular { .. })));
    }

    #[test]
    fn mgs_qr_reconstructs_and_orthogonal() {
        let a = seeded_gaussian_tall(40, 6, 5);
        let (q, r) = a.mgs_qr();
        assert!(q.orthonormality_error() < 1e-12);
        let qr = q.matmul_small(&r).unwrap();
        assert!(qr.max_abs_diff(&a) < 1e-12 * a.frobenius_norm());
        for i in 0..6 {
            assert!(r.get(i, i) >= 0.0);
            for j in 0..i {
                assert_eq!(r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn mgs_qr_zero_column_policy() {
        // Second column duplicates the first: rank deficient.
        let a = DenseTallMatrix::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 2.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let (q, r) = a.mgs_qr();
        assert_eq!(r.get(1, 1), 0.0);
        assert!((0..3).all(|i| q.get(i, 1) == 0.0));
        let qr = q.matmul_small(&r).unwrap();
        assert!(qr.max_abs_diff(&a) < 1e-12);
    }
}
