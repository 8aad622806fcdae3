//! Singular value decomposition of small dense matrices by one-sided Jacobi
//! rotations. Accurate enough that sparse-path and dense-path callers can be
//! compared at 1e-8 tolerances, and free of external kernels so every caller
//! shares the same arithmetic.

use crate::dense::SmallDense;
use crate::LinAlgError;

const MAX_SWEEPS: usize = 60;
const ROTATE_TOL: f64 = 1e-15;

/// Rank-k truncated SVD of a small dense matrix.
///
/// Returns `(F, theta, G)` with `theta` sorted descending and nonnegative,
/// and `F`, `G` carrying k orthonormal columns each, so that
/// `F * diag(theta) * Gᵀ` is the best rank-k approximation of `m`.
///
/// When the matrix has fewer than k numerically nonzero singular values the
/// trailing entries of `theta` are zero and the matching columns of `F` and
/// `G` are padded with an orthonormal complement.
///
/// The sign convention is deterministic: the largest-magnitude entry of each
/// left singular vector is nonnegative. Equal singular values keep their
/// first-occurrence order.
pub fn small_svd(
    m: &SmallDense,
    k: usize,
) -> Result<(SmallDense, Vec<f64>, SmallDense), LinAlgError> {
    if !m.is_finite() {
        return Err(LinAlgError::Numeric("small_svd input contains non-finite values".into()));
    }
    if k == 0 || k > m.rows().min(m.cols()) {
        return Err(LinAlgError::Shape(format!(
            "small_svd: k={k} out of range for {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() >= m.cols() {
        let (f, theta, g) = jacobi_tall(m, k)?;
        Ok((f, theta, g))
    } else {
        let (g, theta, f) = jacobi_tall(&m.transpose(), k)?;
        Ok((f, theta, g))
    }
}

/// One-sided Jacobi on a matrix with rows >= cols. Works on contiguous
/// columns; V accumulates the right rotations.
fn jacobi_tall(
    m: &SmallDense,
    k: usize,
) -> Result<(SmallDense, Vec<f64>, SmallDense), LinAlgError> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| m.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut col = vec![0.0; cols];
            col[j] = 1.0;
            col
        })
        .collect();

    // Columns whose squared norm falls below this are rounding debris;
    // rotating against them never converges because their inner products are
    // fully correlated noise.
    let scale_sq: f64 = m.data().iter().map(|x| x * x).sum();
    let floor = scale_sq * (f64::EPSILON * f64::EPSILON);

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (app, aqq, apq) = cross_terms(&a[p], &a[q]);
                if app <= floor || aqq <= floor {
                    continue;
                }
                if apq.abs() <= ROTATE_TOL * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut a, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        // A final scan decides whether the residual off-diagonal mass is
        // materially above the rotation threshold.
        let mut clean = true;
        'outer: for p in 0..cols {
            for q in p + 1..cols {
                let (app, aqq, apq) = cross_terms(&a[p], &a[q]);
                if app <= floor || aqq <= floor {
                    continue;
                }
                if apq.abs() > 1e-12 * (app * aqq).sqrt().max(f64::MIN_POSITIVE) {
                    clean = false;
                    break 'outer;
                }
            }
        }
        if !clean {
            return Err(LinAlgError::SvdFail { sweeps: MAX_SWEEPS });
        }
    }

    let norms: Vec<f64> = a.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let sig_max = order.first().map_or(0.0, |&i| norms[i]);
    let zero_thresh = sig_max * f64::EPSILON * rows.max(cols) as f64;

    let mut theta = Vec::with_capacity(k);
    let mut f_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut g_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        if norms[idx] > zero_thresh {
            theta.push(norms[idx]);
            f_cols.push(a[idx].iter().map(|x| x / norms[idx]).collect());
            g_cols.push(v[idx].clone());
        } else {
            theta.push(0.0);
            f_cols.push(orthonormal_complement(rows, &f_cols));
            g_cols.push(orthonormal_complement(cols, &g_cols));
        }
    }

    // Sign convention: largest-magnitude entry of each left vector >= 0.
    for (fc, gc) in f_cols.iter_mut().zip(&mut g_cols) {
        let mut imax = 0;
        let mut best = 0.0_f64;
        for (i, &x) in fc.iter().enumerate() {
            if x.abs() > best {
                best = x.abs();
                imax = i;
            }
        }
        if fc[imax] < 0.0 {
            fc.iter_mut().for_each(|x| *x = -*x);
            gc.iter_mut().for_each(|x| *x = -*x);
        }
    }

    let f = SmallDense::from_fn(rows, k, |i, j| f_cols[j][i]);
    let g = SmallDense::from_fn(cols, k, |i, j| g_cols[j][i]);
    Ok((f, theta, g))
}

fn cross_terms(cp: &[f64], cq: &[f64]) -> (f64, f64, f64) {
    let mut app = 0.0;
    let mut aqq = 0.0;
    let mut apq = 0.0;
    for (&x, &y) in cp.iter().zip(cq) {
        app += x * x;
        aqq += y * y;
        apq += x * y;
    }
    (app, aqq, apq)
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Unit vector orthogonal to all `existing` columns, chosen deterministically
/// from the standard basis candidate with the largest residual.
fn orthonormal_complement(dim: usize, existing: &[Vec<f64>]) -> Vec<f64> {
    let mut best_col = vec![0.0; dim];
    let mut best_norm = -1.0_f64;
    for cand in 0..dim {
        let mut col = vec![0.0; dim];
        col[cand] = 1.0;
        for e in existing {
            let proj: f64 = e.iter().zip(&col).map(|(a, b)| a * b).sum();
            for (c, &ev) in col.iter_mut().zip(e) {
                *c -= proj * ev;
            }
        }
        let norm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > best_norm {
            best_norm = norm;
            best_col = col;
        }
        if norm > 0.9 {
            break;
        }
    }
    // A second projection pass keeps the complement orthogonal to working
    // precision.
    for e in existing {
        let proj: f64 = e.iter().zip(&best_col).map(|(a, b)| a * b).sum();
        for (c, &ev) in best_col.iter_mut().zip(e) {
            *c -= proj * ev;
        }
    }
    let norm: f64 = best_col.iter().map(|x| x * x).sum::<f64>().sqrt();
    best_col.iter_mut().for_each(|x| *x /= norm);
    best_col
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_gaussian_small;

    #[test]
    fn diagonal_input() {
        let m = SmallDense::diag(&[3.0, 2.0, 1.0]);
        let (f, theta, g) = small_svd(&m, 2).unwrap();
        assert_eq!(theta, vec![3.0, 2.0]);
        for j in 0..2 {
            for i in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((f.get(i, j) - want).abs() < 1e-14);
                assert!((g.get(i, j) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn one_by_one_negative() {
        let m = SmallDense::from_rows(&[vec![-5.0]]);
        let (f, theta, g) = small_svd(&m, 1).unwrap();
        assert_eq!(theta, vec![5.0]);
        let recon = f.get(0, 0) * 5.0 * g.get(0, 0);
        assert!((recon - (-5.0)).abs() < 1e-14);
        assert!(f.get(0, 0) > 0.0, "left vector sign convention");
    }

    #[test]
    fn truncation_residual_matches_oracle() {
        // Independent oracle: eigenvalues of the Gram matrix from two-sided
        // Jacobi give the squared singular values; Eckart-Young then gives
        // the optimal rank-k residual.
        let m = seeded_gaussian_small(12, 9, 31);
        let k = 4;
        let (f, theta, g) = small_svd(&m, k).unwrap();
        let recon = f.matmul(&SmallDense::diag(&theta)).unwrap().matmul_nt(&g).unwrap();
        let resid = m.sub(&recon).frobenius_norm();

        let gram = m.matmul_tn(&m).unwrap();
        let mut eig = crate::testkit::sym_eigenvalues(&gram);
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let optimal: f64 = eig[k..].iter().map(|&e| e.max(0.0)).sum::<f64>().sqrt();
        assert!(
            (resid - optimal).abs() <= 1e-10 * m.frobenius_norm(),
            "residual {resid} vs optimal {optimal}"
        );
        // Orthonormal factors.
        assert!(f.orthonormality_error() < 1e-12);
        assert!(g.orthonormality_error() < 1e-12);
    }

    #[test]
    fn wide_matrix_handled_by_transposition() {
        let m = seeded_gaussian_small(5, 11, 8);
        let (f, theta, g) = small_svd(&m, 3).unwrap();
        assert_eq!(f.rows(), 5);
        assert_eq!(g.rows(), 11);
        assert!(theta.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.orthonormality_error() < 1e-12);
        assert!(g.orthonormality_error() < 1e-12);
    }

    #[test]
    fn rank_deficient_pads_orthonormally() {
        // Rank-1 3x3 matrix, k = 3.
        let m = SmallDense::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![3.0, 6.0, 9.0],
        ]);
        let (f, theta, g) = small_svd(&m, 3).unwrap();
        assert!(theta[0] > 0.0);
        assert_eq!(theta[1], 0.0);
        assert_eq!(theta[2], 0.0);
        assert!(f.orthonormality_error() < 1e-12);
        assert!(g.orthonormality_error() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = SmallDense::from_rows(&[vec![f64::NAN]]);
        assert!(matches!(small_svd(&m, 1), Err(LinAlgError::Numeric(_))));
        let m = SmallDense::identity(2);
        assert!(matches!(small_svd(&m, 3), Err(LinAlgError::Shape(_))));
    }

    #[test]
    fn singular_values_invariant_under_permutation() {
        let m = seeded_gaussian_small(7, 6, 77);
        let mut perm_rows: Vec<Vec<f64>> = (0..7).map(|i| m.row(i).to_vec()).collect();
        perm_rows.reverse();
        let mp = SmallDense::from_rows(&perm_rows);
        let (_, t1, _) = small_svd(&m, 6).unwrap();
        let (_, t2, _) = small_svd(&mp, 6).unwrap();
        for (a, b) in t1.iter().zip(&t2) {
            assert!((a - b).abs() <= 1e-10 * t1[0]);
        }
    }
}
