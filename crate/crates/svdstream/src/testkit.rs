//! Independent reference routines used by the test suites as oracles.
//! Nothing here is called from the library's production paths; the routines
//! deliberately take the straightforward dense route so that the optimized
//! implementations can be checked against them.

use crate::dense::{DenseTallMatrix, SmallDense};
use crate::sparse::SparseVector;

/// Eigenvalues of a symmetric matrix by classic two-sided cyclic Jacobi.
pub fn sym_eigenvalues(m: &SmallDense) -> Vec<f64> {
    assert_eq!(m.rows(), m.cols(), "symmetric eigenvalues need a square matrix");
    let n = m.rows();
    let mut a = m.clone();
    for _ in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a.get(p, q).abs());
            }
        }
        let scale = (0..n).fold(0.0_f64, |acc, i| acc.max(a.get(i, i).abs())).max(off);
        if off <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, c * aip - s * aiq);
                    a.set(i, q, s * aip + c * aiq);
                }
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, c * apj - s * aqj);
                    a.set(q, j, s * apj + c * aqj);
                }
            }
        }
    }
    (0..n).map(|i| a.get(i, i)).collect()
}

/// Dense application of the projector `(I - U Uᵀ)` to a sparse vector.
pub fn dense_projected(b: &SparseVector, u: &DenseTallMatrix) -> Vec<f64> {
    let m = u.rows();
    let k = u.cols();
    let bd = b.to_dense();
    let mut coeff = vec![0.0; k];
    for (j, c) in coeff.iter_mut().enumerate() {
        *c = (0..m).map(|i| u.get(i, j) * bd[i]).sum();
    }
    let mut out = bd;
    for (i, o) in out.iter_mut().enumerate() {
        let reproj: f64 = (0..k).map(|j| u.get(i, j) * coeff[j]).sum();
        *o -= reproj;
    }
    out
}

pub fn vec_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Residual of projecting the columns of `y` out of the span of `x`:
/// `y - x (xᵀ y)`. Its entries are of the order of the principal-angle
/// sines, so distances resolve down to machine precision instead of the
/// sqrt(eps) floor of Gram-based formulas.
fn span_residual(x: &DenseTallMatrix, y: &DenseTallMatrix) -> DenseTallMatrix {
    let cross = x.xt_y(y).expect("row counts must match");
    let reproj = x.matmul_small(&cross).expect("shape");
    DenseTallMatrix::from_fn(y.rows(), y.cols(), |i, j| y.get(i, j) - reproj.get(i, j))
}

/// Largest principal angle (in radians) between the column spaces of two
/// tall matrices with orthonormal columns.
pub fn max_principal_angle(x: &DenseTallMatrix, y: &DenseTallMatrix) -> f64 {
    let resid = span_residual(x, y);
    let gram = resid.gram();
    let mut eig = sym_eigenvalues(&gram);
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sin_max = eig.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    sin_max.min(1.0).asin()
}

/// Frobenius distance between the orthogonal projectors onto the column
/// spaces of two matrices with orthonormal columns and equal column counts:
/// `sqrt(2) * || sin(theta) ||_2` over the principal angles.
pub fn projector_distance(x: &DenseTallMatrix, y: &DenseTallMatrix) -> f64 {
    assert_eq!(x.cols(), y.cols(), "projector distance needs equal ranks");
    let r1 = span_residual(x, y).frobenius_norm();
    let r2 = span_residual(y, x).frobenius_norm();
    (r1 * r1 + r2 * r2).sqrt()
}

/// Dense reconstruction `U diag(s) Vᵀ`.
pub fn reconstruct_triple(u: &DenseTallMatrix, s: &[f64], v: &DenseTallMatrix) -> SmallDense {
    let us = u.matmul_small(&SmallDense::diag(s)).expect("shape");
    let mut out = SmallDense::zeros(u.rows(), v.rows());
    for i in 0..u.rows() {
        for j in 0..v.rows() {
            out.set(i, j, vec_dot(us.row(i), v.row(j)));
        }
    }
    out
}

/// Relative Frobenius distance between two dense matrices.
pub fn rel_frobenius(a: &SmallDense, b: &SmallDense) -> f64 {
    let denom = a.frobenius_norm().max(1e-300);
    a.sub(b).frobenius_norm() / denom
}
