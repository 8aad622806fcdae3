//! Dense reference implementations of the classic truncated-SVD update
//! schemes. They serve two roles: correctness oracles for the sparse engine
//! (same inner SVD kernel, same seeded initializations, so outputs are
//! comparable at tight tolerances) and rivals in the runtime benchmarks.
//!
//! All of them follow the same three-step shape: build an orthonormal
//! augmentation of the current subspace, solve a compact SVD, rotate the
//! factors.

use crate::dense::{mgs_columns, DenseTallMatrix, SmallDense};
use crate::lcov::{gkl_projection, BREAKDOWN_TOL};
use crate::rng::{seeded_orthonormal_small, seeded_unit_vector, weight_side_seeds};
use crate::sparse::{spmv_transpose, SparseMatrix};
use crate::svd::small_svd;
use crate::{LinAlgError, StepTimes, MATERIALIZE_CAP};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("matrix too large to materialize: {rows}x{cols} exceeds {cap} entries")]
    TooLarge { rows: usize, cols: usize, cap: usize },
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Dense rank-k factorization `U diag(sigma) Vᵀ` with orthonormal columns
/// and descending nonnegative singular values.
#[derive(Debug, Clone)]
pub struct DenseSvdTriple {
    pub u: DenseTallMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseTallMatrix,
}

impl DenseSvdTriple {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> Result<SmallDense, BaselineError> {
        let (m, n) = (self.u.rows(), self.v.rows());
        if m.saturating_mul(n) > MATERIALIZE_CAP {
            return Err(BaselineError::TooLarge { rows: m, cols: n, cap: MATERIALIZE_CAP });
        }
        let us = self.u.matmul_small(&SmallDense::diag(&self.sigma))?;
        let mut out = SmallDense::zeros(m, n);
        for i in 0..m {
            let ri = us.row(i);
            for j in 0..n {
                let rj = self.v.row(j);
                out.set(i, j, ri.iter().zip(rj).map(|(a, b)| a * b).sum());
            }
        }
        Ok(out)
    }
}

/// Optimal rank-k factorization of a sparse matrix via a dense SVD.
pub fn direct_truncated_svd(a: &SparseMatrix, k: usize) -> Result<DenseSvdTriple, BaselineError> {
    let (m, n) = (a.rows(), a.cols());
    if m.saturating_mul(n) > MATERIALIZE_CAP {
        return Err(BaselineError::TooLarge { rows: m, cols: n, cap: MATERIALIZE_CAP });
    }
    let dense = a.to_dense();
    let (f, theta, g) = small_svd(&dense, k)?;
    Ok(DenseSvdTriple {
        u: DenseTallMatrix::from_small(&f),
        sigma: theta,
        v: DenseTallMatrix::from_small(&g),
    })
}

/// Rank-k factorization of a tall sparse matrix through the Gram matrix of
/// its smaller side; avoids materializing the full matrix, so it scales to
/// large `max(m, n)` as long as `min(m, n)` stays small.
pub fn truncated_svd_gram(a: &SparseMatrix, k: usize) -> Result<DenseSvdTriple, BaselineError> {
    if a.cols() <= a.rows() {
        let n = a.cols();
        // G = AᵀA, eigen through the shared SVD kernel.
        let mut gram = SmallDense::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let d = a.col(i).dot(a.col(j));
                gram.set(i, j, d);
                gram.set(j, i, d);
            }
        }
        let (w, lambda, _) = small_svd(&gram, k)?;
        let sigma: Vec<f64> = lambda.iter().map(|&l| l.max(0.0).sqrt()).collect();
        let v = DenseTallMatrix::from_small(&w);
        // U = A V diag(1/sigma) for the numerically nonzero directions.
        let mut u = DenseTallMatrix::zeros(a.rows(), k);
        for (j, col) in a.columns().iter().enumerate() {
            let wrow = w.row(j);
            for (i, val) in col.iter() {
                let urow = u.row_mut(i);
                for (dst, &wv) in urow.iter_mut().zip(wrow) {
                    *dst += val * wv;
                }
            }
        }
        let floor = sigma.first().copied().unwrap_or(0.0) * 1e-12;
        for i in 0..u.rows() {
            for (j, &s) in sigma.iter().enumerate() {
                let v = if s > floor { u.get(i, j) / s } else { 0.0 };
                u.set(i, j, v);
            }
        }
        Ok(DenseSvdTriple { u, sigma, v })
    } else {
        let t = truncated_svd_gram(&a.transpose(), k)?;
        Ok(DenseSvdTriple { u: t.v, sigma: t.sigma, v: t.u })
    }
}

/// Initial factorization for streaming runs: dense route below the
/// materialization cap, Gram route above it.
pub fn initial_svd(a: &SparseMatrix, k: usize) -> Result<DenseSvdTriple, BaselineError> {
    if a.rows().saturating_mul(a.cols()) <= MATERIALIZE_CAP {
        direct_truncated_svd(a, k)
    } else {
        truncated_svd_gram(a, k)
    }
}

/// `Uᵀ E` as a small dense block (k x s).
fn u_transpose_e(u: &DenseTallMatrix, e: &SparseMatrix) -> Result<SmallDense, LinAlgError> {
    Ok(spmv_transpose(e, u)?.transpose())
}

/// Materialize the projected update `(I - U Uᵀ) E` as contiguous columns.
fn projected_columns(u: &DenseTallMatrix, e: &SparseMatrix, c0: &SmallDense) -> Vec<Vec<f64>> {
    let m = u.rows();
    let s = e.cols();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(s);
    for j in 0..s {
        let mut col = vec![0.0; m];
        for (i, v) in e.col(j).iter() {
            col[i] = v;
        }
        for (i, cv) in col.iter_mut().enumerate() {
            let urow = u.row(i);
            let mut proj = 0.0;
            for (p, &uv) in urow.iter().enumerate() {
                proj += uv * c0.get(p, j);
            }
            *cv -= proj;
        }
        cols.push(col);
    }
    cols
}

/// Core matrix `[diag(sigma), c0; 0, bottom]`.
fn core_add_columns(sigma: &[f64], c0: &SmallDense, bottom: &SmallDense) -> SmallDense {
    let k = sigma.len();
    let s = c0.cols();
    let r = bottom.rows();
    let mut core = SmallDense::zeros(k + r, k + s);
    for (i, &sv) in sigma.iter().enumerate() {
        core.set(i, i, sv);
    }
    for i in 0..k {
        for j in 0..s {
            core.set(i, k + j, c0.get(i, j));
        }
    }
    for i in 0..r {
        for j in 0..s {
            core.set(k + i, k + j, bottom.get(i, j));
        }
    }
    core
}

/// Rotation after the compact SVD of an add-columns step: the new left
/// factor is `U F[:k] + Q F[k:]`, the new right factor stacks `V G[:k]`
/// over `G[k:]`.
fn rotate_add_columns(
    t: &DenseSvdTriple,
    q_cols: &[Vec<f64>],
    f: &SmallDense,
    theta: Vec<f64>,
    g: &SmallDense,
    s: usize,
) -> Result<DenseSvdTriple, BaselineError> {
    let k = t.k();
    let r = q_cols.len();
    let f_top = f.block(0..k, 0..k);
    let f_bot = f.block(k..k + r, 0..k);
    let mut u_new = t.u.matmul_small(&f_top)?;
    if r > 0 {
        let m = t.u.rows();
        let q = DenseTallMatrix::from_cols(m, q_cols);
        u_new.add_matmul_small(&q, &f_bot)?;
    }
    let g_top = g.block(0..k, 0..k);
    let g_bot = g.block(k..k + s, 0..k);
    let mut v_new = t.v.matmul_small(&g_top)?;
    for i in 0..s {
        v_new.append_row(g_bot.row(i));
    }
    Ok(DenseSvdTriple { u: u_new, sigma: theta, v: v_new })
}

/// Exact dense update after appending columns: QR of the projected update,
/// compact SVD of the augmented core, rotation of both factors.
pub fn zha_simon_add_columns(
    t: &DenseSvdTriple,
    e_c: &SparseMatrix,
) -> Result<DenseSvdTriple, BaselineError> {
    Ok(zha_simon_add_columns_timed(t, e_c)?.0)
}

pub fn zha_simon_add_columns_timed(
    t: &DenseSvdTriple,
    e_c: &SparseMatrix,
) -> Result<(DenseSvdTriple, StepTimes), BaselineError> {
    if e_c.rows() != t.u.rows() {
        return Err(LinAlgError::Shape(format!(
            "add_columns: update has {} rows, state has {}",
            e_c.rows(),
            t.u.rows()
        ))
        .into());
    }
    let s = e_c.cols();
    let t0 = Instant::now();
    let c0 = u_transpose_e(&t.u, e_c)?;
    let mut cols = projected_columns(&t.u, e_c, &c0);
    let r = mgs_columns(&mut cols);
    let pre = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let core = core_add_columns(&t.sigma, &c0, &r);
    let (f, theta, g) = small_svd(&core, t.k())?;
    let svd_t = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let out = rotate_add_columns(t, &cols, &f, theta, &g, s)?;
    let post = t2.elapsed().as_secs_f64();
    Ok((out, StepTimes { pre_svd: pre, svd: svd_t, post_svd: post }))
}

/// Exact dense update after appending rows, via the transposed problem.
pub fn zha_simon_add_rows(
    t: &DenseSvdTriple,
    e_rt: &SparseMatrix,
) -> Result<DenseSvdTriple, BaselineError> {
    Ok(zha_simon_add_rows_timed(t, e_rt)?.0)
}

pub fn zha_simon_add_rows_timed(
    t: &DenseSvdTriple,
    e_rt: &SparseMatrix,
) -> Result<(DenseSvdTriple, StepTimes), BaselineError> {
    let flipped = DenseSvdTriple { u: t.v.clone(), sigma: t.sigma.clone(), v: t.u.clone() };
    let (res, times) = zha_simon_add_columns_timed(&flipped, e_rt)?;
    Ok((DenseSvdTriple { u: res.v, sigma: res.sigma, v: res.u }, times))
}

/// Exact dense update for a low-rank weight modification `A + D Eᵀ`.
pub fn zha_simon_update_weights(
    t: &DenseSvdTriple,
    d: &SparseMatrix,
    e_m: &SparseMatrix,
) -> Result<DenseSvdTriple, BaselineError> {
    Ok(zha_simon_update_weights_timed(t, d, e_m)?.0)
}

pub fn zha_simon_update_weights_timed(
    t: &DenseSvdTriple,
    d: &SparseMatrix,
    e_m: &SparseMatrix,
) -> Result<(DenseSvdTriple, StepTimes), BaselineError> {
    check_weight_shapes(t, d, e_m)?;
    let t0 = Instant::now();
    let c0d = u_transpose_e(&t.u, d)?;
    let mut d_cols = projected_columns(&t.u, d, &c0d);
    let rd = mgs_columns(&mut d_cols);
    let c0e = u_transpose_e(&t.v, e_m)?;
    let mut e_cols = projected_columns(&t.v, e_m, &c0e);
    let re = mgs_columns(&mut e_cols);
    let pre = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let core = core_update_weights(&t.sigma, &c0d, &rd, &c0e, &re)?;
    let (f, theta, g) = small_svd(&core, t.k())?;
    let svd_t = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let out = rotate_update_weights(t, &d_cols, &e_cols, &f, theta, &g)?;
    let post = t2.elapsed().as_secs_f64();
    Ok((out, StepTimes { pre_svd: pre, svd: svd_t, post_svd: post }))
}

fn check_weight_shapes(
    t: &DenseSvdTriple,
    d: &SparseMatrix,
    e_m: &SparseMatrix,
) -> Result<(), LinAlgError> {
    if d.rows() != t.u.rows() || e_m.rows() != t.v.rows() || d.cols() != e_m.cols() {
        return Err(LinAlgError::Shape(format!(
            "update_weights: D is {}x{}, E is {}x{}, state is {}x{}",
            d.rows(),
            d.cols(),
            e_m.rows(),
            e_m.cols(),
            t.u.rows(),
            t.v.rows()
        )));
    }
    Ok(())
}

/// Core matrix `[diag(sigma) 0; 0 0] + [c0d; bd] [c0e; be]ᵀ`.
fn core_update_weights(
    sigma: &[f64],
    c0d: &SmallDense,
    bd: &SmallDense,
    c0e: &SmallDense,
    be: &SmallDense,
) -> Result<SmallDense, LinAlgError> {
    let left = SmallDense::vstack(c0d, bd);
    let right = SmallDense::vstack(c0e, be);
    let mut core = left.matmul_nt(&right)?;
    for (i, &sv) in sigma.iter().enumerate() {
        let v = core.get(i, i) + sv;
        core.set(i, i, v);
    }
    Ok(core)
}

fn rotate_update_weights(
    t: &DenseSvdTriple,
    d_cols: &[Vec<f64>],
    e_cols: &[Vec<f64>],
    f: &SmallDense,
    theta: Vec<f64>,
    g: &SmallDense,
) -> Result<DenseSvdTriple, BaselineError> {
    let k = t.k();
    let rd = d_cols.len();
    let re = e_cols.len();
    let mut u_new = t.u.matmul_small(&f.block(0..k, 0..k))?;
    if rd > 0 {
        let q = DenseTallMatrix::from_cols(t.u.rows(), d_cols);
        u_new.add_matmul_small(&q, &f.block(k..k + rd, 0..k))?;
    }
    let mut v_new = t.v.matmul_small(&g.block(0..k, 0..k))?;
    if re > 0 {
        let q = DenseTallMatrix::from_cols(t.v.rows(), e_cols);
        v_new.add_matmul_small(&q, &g.block(k..k + re, 0..k))?;
    }
    Ok(DenseSvdTriple { u: u_new, sigma: theta, v: v_new })
}

/// Dense Golub-Kahan-Lanczos approximation of the projected update columns.
/// Mirrors the tuple-form construction step for step so that seed-matched
/// runs agree: same starting vector, same full reorthogonalization, same
/// breakdown rule, same extended bidiagonal projection.
fn dense_gkl(z_cols: &[Vec<f64>], l: usize, seed: u64) -> (Vec<Vec<f64>>, SmallDense) {
    let s = z_cols.len();
    let m = z_cols.first().map_or(0, Vec::len);
    let mut p_vecs: Vec<Vec<f64>> = vec![seeded_unit_vector(s, seed)];
    let mut q_vecs: Vec<Vec<f64>> = Vec::with_capacity(l);
    let mut alphas: Vec<f64> = Vec::with_capacity(l);
    let mut betas: Vec<f64> = Vec::with_capacity(l);
    for i in 0..l {
        let mut cand = vec![0.0; m];
        for (col, &w) in z_cols.iter().zip(&p_vecs[i]) {
            if w == 0.0 {
                continue;
            }
            for (cv, &zv) in cand.iter_mut().zip(col) {
                *cv += w * zv;
            }
        }
        if i > 0 {
            let beta = betas[i - 1];
            for (cv, qv) in cand.iter_mut().zip(&q_vecs[i - 1]) {
                *cv -= beta * qv;
            }
        }
        let alpha = norm(&cand);
        if alpha < BREAKDOWN_TOL {
            break;
        }
        cand.iter_mut().for_each(|x| *x /= alpha);
        alphas.push(alpha);

        let mut p_next: Vec<f64> = z_cols.iter().map(|col| dot(col, &cand)).collect();
        for (pn, pv) in p_next.iter_mut().zip(&p_vecs[i]) {
            *pn -= alpha * pv;
        }
        for prev in &p_vecs {
            let proj = dot(&p_next, prev);
            for (pn, pv) in p_next.iter_mut().zip(prev) {
                *pn -= proj * pv;
            }
        }
        let beta = norm(&p_next);
        q_vecs.push(cand);
        if beta < BREAKDOWN_TOL {
            break;
        }
        betas.push(beta);
        p_next.iter_mut().for_each(|x| *x /= beta);
        p_vecs.push(p_next);
    }
    let p = gkl_projection(&p_vecs, &alphas, &betas, s, q_vecs.len());
    (q_vecs, p)
}

/// Dense randomized-power-iteration approximation of the projected update
/// columns; mirrors the tuple-form construction.
fn dense_rpi(z_cols: &[Vec<f64>], l: usize, t: usize, seed: u64) -> (Vec<Vec<f64>>, SmallDense) {
    let s = z_cols.len();
    let m = z_cols.first().map_or(0, Vec::len);
    let mut p = seeded_orthonormal_small(s, l, seed);
    let mut q: Vec<Vec<f64>> = Vec::new();
    for iter in 0..t {
        q = (0..l)
            .map(|j| {
                let mut col = vec![0.0; m];
                for (zc, r) in z_cols.iter().zip(0..s) {
                    let w = p.get(r, j);
                    if w == 0.0 {
                        continue;
                    }
                    for (cv, &zv) in col.iter_mut().zip(zc) {
                        *cv += w * zv;
                    }
                }
                col
            })
            .collect();
        mgs_columns(&mut q);
        if iter == 0 && q.iter().all(|col| col.iter().all(|&v| v == 0.0)) {
            return (Vec::new(), SmallDense::zeros(s, 0));
        }
        p = SmallDense::from_fn(s, l, |r, j| dot(&z_cols[r], &q[j]));
    }
    (q, p)
}

/// Add-columns update with the GKL-approximated augmentation.
pub fn dense_gkl_add_columns(
    t: &DenseSvdTriple,
    e_c: &SparseMatrix,
    l: usize,
    seed: u64,
) -> Result<DenseSvdTriple, BaselineError> {
    Ok(dense_gkl_add_columns_timed(t, e_c, l, seed)?.0)
}

pub fn dense_gkl_add_columns_timed(
    t: &DenseSvdTriple,
    e_c: &SparseMatrix,
    l: usize,
    seed: u64,
) -> Result<(DenseSvdTriple, StepTimes), BaselineError> {
    approx_add_columns_timed(t, e_c, AugmentKind::Gkl { l, seed })
}

/// Add-columns update with the RPI-approximated augmentation.
pub fn dense_rpi_add_columns(
    t: &DenseSvdTriple,
    e_c: &SparseMatrix,
    l: usize,
    iters: usize,
    seed: u64,
) -> Result<DenseSvdTriple, BaselineError> {
    Ok(dense_rpi_add_columns_timed(t, e_c, l, iters, seed)?.0)
}

pub fn dense_rpi_add_columns_timed(
    t: &DenseSvdTriple,
    e_c: &SparseMatrix,
    l: usize,
    iters: usize,
    seed: u64,
) -> Result<(DenseSvdTriple, StepTimes), BaselineError> {
    approx_add_columns_timed(t, e_c, AugmentKind::Rpi { l, t: iters, seed })
}

enum AugmentKind {
    Gkl { l: usize, seed: u64 },
    Rpi { l: usize, t: usize, seed: u64 },
}

impl AugmentKind {
    fn run(&self, z_cols: &[Vec<f64>], s: usize) -> (Vec<Vec<f64>>, SmallDense) {
        match *self {
            AugmentKind::Gkl { l, seed } => dense_gkl(z_cols, l.min(s), seed),
            AugmentKind::Rpi { l, t, seed } => dense_rpi(z_cols, l.min(s), t, seed),
        }
    }
}

fn approx_add_columns_timed(
    t: &DenseSvdTriple,
    e_c: &SparseMatrix,
    kind: AugmentKind,
) -> Result<(DenseSvdTriple, StepTimes), BaselineError> {
    if e_c.rows() != t.u.rows() {
        return Err(LinAlgError::Shape(format!(
            "add_columns: update has {} rows, state has {}",
            e_c.rows(),
            t.u.rows()
        ))
        .into());
    }
    let s = e_c.cols();
    let t0 = Instant::now();
    let c0 = u_transpose_e(&t.u, e_c)?;
    let z_cols = projected_columns(&t.u, e_c, &c0);
    let (q_cols, p) = kind.run(&z_cols, s);
    let pre = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let core = core_add_columns(&t.sigma, &c0, &p.transpose());
    let (f, theta, g) = small_svd(&core, t.k())?;
    let svd_t = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let out = rotate_add_columns(t, &q_cols, &f, theta, &g, s)?;
    let post = t2.elapsed().as_secs_f64();
    Ok((out, StepTimes { pre_svd: pre, svd: svd_t, post_svd: post }))
}

/// Add-rows updates with approximated augmentation, via the transposed
/// problem (the projection happens on the V side, as in the tuple engine).
pub fn dense_gkl_add_rows(
    t: &DenseSvdTriple,
    e_rt: &SparseMatrix,
    l: usize,
    seed: u64,
) -> Result<DenseSvdTriple, BaselineError> {
    let flipped = DenseSvdTriple { u: t.v.clone(), sigma: t.sigma.clone(), v: t.u.clone() };
    let res = dense_gkl_add_columns(&flipped, e_rt, l, seed)?;
    Ok(DenseSvdTriple { u: res.v, sigma: res.sigma, v: res.u })
}

pub fn dense_rpi_add_rows(
    t: &DenseSvdTriple,
    e_rt: &SparseMatrix,
    l: usize,
    iters: usize,
    seed: u64,
) -> Result<DenseSvdTriple, BaselineError> {
    let flipped = DenseSvdTriple { u: t.v.clone(), sigma: t.sigma.clone(), v: t.u.clone() };
    let res = dense_rpi_add_columns(&flipped, e_rt, l, iters, seed)?;
    Ok(DenseSvdTriple { u: res.v, sigma: res.sigma, v: res.u })
}

/// Weight update with GKL-approximated augmentations on both sides.
pub fn dense_gkl_update_weights(
    t: &DenseSvdTriple,
    d: &SparseMatrix,
    e_m: &SparseMatrix,
    l: usize,
    seed: u64,
) -> Result<DenseSvdTriple, BaselineError> {
    let (sd, se) = weight_side_seeds(seed);
    approx_update_weights(t, d, e_m, &AugmentKind::Gkl { l, seed: sd }, &AugmentKind::Gkl {
        l,
        seed: se,
    })
}

/// Weight update with RPI-approximated augmentations on both sides.
pub fn dense_rpi_update_weights(
    t: &DenseSvdTriple,
    d: &SparseMatrix,
    e_m: &SparseMatrix,
    l: usize,
    iters: usize,
    seed: u64,
) -> Result<DenseSvdTriple, BaselineError> {
    let (sd, se) = weight_side_seeds(seed);
    approx_update_weights(
        t,
        d,
        e_m,
        &AugmentKind::Rpi { l, t: iters, seed: sd },
        &AugmentKind::Rpi { l, t: iters, seed: se },
    )
}

fn approx_update_weights(
    t: &DenseSvdTriple,
    d: &SparseMatrix,
    e_m: &SparseMatrix,
    kind_d: &AugmentKind,
    kind_e: &AugmentKind,
) -> Result<DenseSvdTriple, BaselineError> {
    check_weight_shapes(t, d, e_m)?;
    let s = d.cols();
    let c0d = u_transpose_e(&t.u, d)?;
    let zd = projected_columns(&t.u, d, &c0d);
    let (qd, pd) = kind_d.run(&zd, s);
    let c0e = u_transpose_e(&t.v, e_m)?;
    let ze = projected_columns(&t.v, e_m, &c0e);
    let (qe, pe) = kind_e.run(&ze, s);
    let core = core_update_weights(&t.sigma, &c0d, &pd.transpose(), &c0e, &pe.transpose())?;
    let (f, theta, g) = small_svd(&core, t.k())?;
    Ok(rotate_update_weights(t, &qd, &qe, &f, theta, &g)?)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_sparse_matrix, Rng64};
    use crate::sparse::SparseVector;
    use crate::testkit::rel_frobenius;

    #[test]
    fn direct_svd_diagonal_and_rank_deficient() {
        let a = SparseMatrix::from_triplets(4, 3, &[(0, 0, 5.0), (1, 1, 3.0)]);
        let t = direct_truncated_svd(&a, 3).unwrap();
        assert!((t.sigma[0] - 5.0).abs() < 1e-12);
        assert!((t.sigma[1] - 3.0).abs() < 1e-12);
        assert_eq!(t.sigma[2], 0.0);
        assert!(t.u.orthonormality_error() < 1e-12);
        assert!(t.v.orthonormality_error() < 1e-12);
    }

    #[test]
    fn direct_svd_residual_matches_eckart_young() {
        let mut rng = Rng64::new(10);
        let a = random_sparse_matrix(50, 40, 0.2, &mut rng);
        let k = 6;
        let t = direct_truncated_svd(&a, k).unwrap();
        let recon = t.reconstruct().unwrap();
        let resid = a.to_dense().sub(&recon).frobenius_norm();

        let full = direct_truncated_svd(&a, 40).unwrap();
        let want: f64 = full.sigma[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((resid - want).abs() <= 1e-9 * a.frobenius_norm());
    }

    #[test]
    fn direct_svd_too_large() {
        let a = SparseMatrix::zeros(40_000, 200);
        assert!(matches!(direct_truncated_svd(&a, 2), Err(BaselineError::TooLarge { .. })));
    }

    #[test]
    fn gram_route_agrees_with_dense_route() {
        let mut rng = Rng64::new(44);
        let a = random_sparse_matrix(120, 30, 0.1, &mut rng);
        let k = 5;
        let dense = direct_truncated_svd(&a, k).unwrap();
        let gram = truncated_svd_gram(&a, k).unwrap();
        for (x, y) in dense.sigma.iter().zip(&gram.sigma) {
            assert!((x - y).abs() <= 1e-8 * dense.sigma[0].max(1.0));
        }
        let d = rel_frobenius(&dense.reconstruct().unwrap(), &gram.reconstruct().unwrap());
        assert!(d < 1e-8, "gram reconstruction off by {d}");
    }

    #[test]
    fn zha_add_columns_zero_update_keeps_sigma() {
        let mut rng = Rng64::new(3);
        let a = random_sparse_matrix(30, 20, 0.2, &mut rng);
        let t = direct_truncated_svd(&a, 4).unwrap();
        let e = SparseMatrix::zeros(30, 2);
        let t2 = zha_simon_add_columns(&t, &e).unwrap();
        for (x, y) in t.sigma.iter().zip(&t2.sigma) {
            assert!((x - y).abs() < 1e-10);
        }
        assert_eq!(t2.v.rows(), 22);
        // The appended right rows carry no projection.
        for i in 20..22 {
            assert!(t2.v.row(i).iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn zha_add_columns_matches_direct_svd_of_updated_matrix() {
        // Start from an exactly rank-k matrix so the truncated state is the
        // matrix itself and the update semantics coincide with a direct SVD.
        let mut rng = Rng64::new(8);
        let k = 3;
        let left = random_sparse_matrix(25, k, 0.5, &mut rng).to_dense();
        let right = random_sparse_matrix(18, k, 0.5, &mut rng).to_dense();
        let product = left.matmul_nt(&right).unwrap();
        let mut trips = Vec::new();
        for i in 0..25 {
            for j in 0..18 {
                let v = product.get(i, j);
                if v != 0.0 {
                    trips.push((i, j, v));
                }
            }
        }
        let a = SparseMatrix::from_triplets(25, 18, &trips);
        let t = direct_truncated_svd(&a, k).unwrap();

        let e = random_sparse_matrix(25, 2, 0.3, &mut rng);
        let updated = zha_simon_add_columns(&t, &e).unwrap();

        let mut trips2 = trips.clone();
        for (i, j, v) in e.iter_entries() {
            trips2.push((i, 18 + j, v));
        }
        let a2 = SparseMatrix::from_triplets(25, 20, &trips2);
        let want = direct_truncated_svd(&a2, k).unwrap();
        for (x, y) in updated.sigma.iter().zip(&want.sigma) {
            assert!((x - y).abs() <= 1e-8 * want.sigma[0]);
        }
        let d = rel_frobenius(&want.reconstruct().unwrap(), &updated.reconstruct().unwrap());
        assert!(d < 1e-8, "reconstruction off by {d}");
        // Updated factors keep the triple invariants.
        assert!(updated.u.orthonormality_error() < 1e-10);
        assert!(updated.v.orthonormality_error() < 1e-10);
        assert!(updated.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zha_update_weights_zero_is_identity() {
        let mut rng = Rng64::new(5);
        let a = random_sparse_matrix(20, 15, 0.25, &mut rng);
        let t = direct_truncated_svd(&a, 3).unwrap();
        let d = SparseMatrix::zeros(20, 2);
        let e = SparseMatrix::zeros(15, 2);
        let t2 = zha_simon_update_weights(&t, &d, &e).unwrap();
        let drift = rel_frobenius(&t.reconstruct().unwrap(), &t2.reconstruct().unwrap());
        assert!(drift < 1e-12);
    }

    #[test]
    fn zha_update_weights_cancels_trailing_triplet() {
        let mut rng = Rng64::new(6);
        let a = random_sparse_matrix(22, 16, 0.3, &mut rng);
        let k = 3;
        let t = direct_truncated_svd(&a, k).unwrap();
        // D = -sigma_k u_k, E = v_k cancels the weakest kept triplet.
        let uk: Vec<f64> = (0..22).map(|i| t.u.get(i, k - 1)).collect();
        let vk: Vec<f64> = (0..16).map(|i| t.v.get(i, k - 1)).collect();
        let d = SparseMatrix::from_columns(
            22,
            vec![SparseVector::from_dense(
                &uk.iter().map(|x| -t.sigma[k - 1] * x).collect::<Vec<_>>(),
            )],
        );
        let e = SparseMatrix::from_columns(16, vec![SparseVector::from_dense(&vk)]);
        let t2 = zha_simon_update_weights(&t, &d, &e).unwrap();
        assert!(t2.sigma[k - 1].abs() < 1e-8 * t.sigma[0]);
        // Leading singular values survive.
        for j in 0..k - 1 {
            assert!((t2.sigma[j] - t.sigma[j]).abs() < 1e-8 * t.sigma[0]);
        }
    }

    #[test]
    fn gkl_full_l_equals_exact_update() {
        // With l = s and a full-rank update the approximate augmentation
        // spans the same space as the QR, so the update must agree with the
        // exact scheme.
        let mut rng = Rng64::new(11);
        let a = random_sparse_matrix(30, 24, 0.2, &mut rng);
        let t = direct_truncated_svd(&a, 4).unwrap();
        let e = random_sparse_matrix(30, 3, 0.3, &mut rng);
        let exact = zha_simon_add_columns(&t, &e).unwrap();
        let gkl = dense_gkl_add_columns(&t, &e, 3, 9).unwrap();
        for (x, y) in exact.sigma.iter().zip(&gkl.sigma) {
            assert!((x - y).abs() <= 1e-8 * exact.sigma[0]);
        }
        let d = rel_frobenius(&exact.reconstruct().unwrap(), &gkl.reconstruct().unwrap());
        assert!(d < 1e-8, "gkl l=s reconstruction off by {d}");

        let rpi = dense_rpi_add_columns(&t, &e, 3, 2, 9).unwrap();
        let d = rel_frobenius(&exact.reconstruct().unwrap(), &rpi.reconstruct().unwrap());
        assert!(d < 1e-8, "rpi l=s reconstruction off by {d}");
    }

    #[test]
    fn single_column_approximations_are_exact() {
        let mut rng = Rng64::new(12);
        let a = random_sparse_matrix(28, 18, 0.2, &mut rng);
        let t = direct_truncated_svd(&a, 3).unwrap();
        let e = random_sparse_matrix(28, 1, 0.4, &mut rng);
        let exact = zha_simon_add_columns(&t, &e).unwrap();
        let gkl = dense_gkl_add_columns(&t, &e, 1, 77).unwrap();
        let d = rel_frobenius(&exact.reconstruct().unwrap(), &gkl.reconstruct().unwrap());
        assert!(d < 1e-9);
    }
}
