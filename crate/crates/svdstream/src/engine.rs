//! The maintained truncated-SVD data structure.
//!
//! The factorization is stored as five matrices `U' U'' Σ V''ᵀ V'ᵀ` where
//! only `U' U''` and `V' V''` are orthonormal, not the primed factors on
//! their own. Updates touch the small inner factors plus the sparse support
//! of the update, so the per-update cost depends on `nnz(update)`, `k` and
//! the update rank `s`, never on the matrix dimensions. Queries compose one
//! stored row with the inner factor in O(k^2).
//!
//! Concurrency contract: single writer, multiple readers. Updates need
//! exclusive access; queries are read-only and may run concurrently with
//! each other but not with an in-flight update. No internal locking.

use crate::dense::{DenseTallMatrix, SmallDense};
use crate::lcov::{ApproxBasis, LcovError, LcovSpace, SvLcov};
use crate::rng::weight_side_seeds;
use crate::sparse::{sparse_axpy_block, SparseMatrix, SparseVector};
use crate::svd::small_svd;
use crate::{LinAlgError, StepTimes, MATERIALIZE_CAP};
use std::time::Instant;

/// Orthonormality tolerance demanded of `init` inputs.
pub const INIT_ORTHO_TOL: f64 = 1e-8;

/// Orthonormality tolerance the state guarantees after every public
/// operation.
pub const STATE_ORTHO_TOL: f64 = 1e-7;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("input factor is not orthonormal (deviation {err:.3e})")]
    NotOrthonormal { err: f64 },
    #[error("bad singular values: {0}")]
    BadSigma(String),
    #[error("index {index} out of bounds for dimension {len}")]
    Oob { index: usize, len: usize },
    #[error("reconstruction too large: {rows}x{cols} exceeds {cap} entries")]
    TooLarge { rows: usize, cols: usize, cap: usize },
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported state file version {found}")]
    StateVersion { found: u32 },
    #[error("corrupt state file: {0}")]
    CorruptState(String),
}

impl From<LcovError> for EngineError {
    fn from(e: LcovError) -> Self {
        match e {
            LcovError::LinAlg(inner) => EngineError::LinAlg(inner),
            LcovError::BasisMismatch => {
                EngineError::Shape("svlcov basis mismatch inside engine".into())
            }
        }
    }
}

/// Which augmentation the update uses: the exact Gram-Schmidt basis or one
/// of the approximate constructions for wide updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    Exact,
    Gkl,
    Rpi,
}

/// Per-update configuration.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct VariantConfig {
    pub mode: UpdateMode,
    /// Approximation rank for GKL/RPI (clamped to the update rank).
    pub l: usize,
    /// Power-iteration count for RPI.
    pub t: usize,
    pub seed: u64,
    /// Condition-estimate bound on the inner factors beyond which the state
    /// re-orthonormalizes itself.
    pub reset_threshold: f64,
}

impl Default for VariantConfig {
    fn default() -> Self {
        Self { mode: UpdateMode::Exact, l: 10, t: 3, seed: 0, reset_threshold: 1e8 }
    }
}

impl VariantConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn gkl(l: usize, seed: u64) -> Self {
        Self { mode: UpdateMode::Gkl, l, seed, ..Self::default() }
    }

    pub fn rpi(l: usize, t: usize, seed: u64) -> Self {
        Self { mode: UpdateMode::Rpi, l, t, seed, ..Self::default() }
    }
}

/// One pending mutation of the maintained matrix.
#[derive(Debug, Clone)]
pub enum UpdateBatch {
    /// New rows; stored as the transpose, one column per new row.
    AddRows(SparseMatrix),
    /// New columns, one column per new column of the matrix.
    AddColumns(SparseMatrix),
    /// Low-rank modification `A + D Eᵀ`.
    UpdateWeights { d: SparseMatrix, e: SparseMatrix },
}

/// Maintained rank-k truncated SVD under streaming updates.
#[derive(Debug, Clone)]
pub struct TruncatedSvdState {
    m: usize,
    n: usize,
    k: usize,
    u_prime: DenseTallMatrix,
    u_dd: SmallDense,
    sigma: Vec<f64>,
    v_dd: SmallDense,
    v_prime: DenseTallMatrix,
    update_count: u64,
    reset_count: u64,
    cond_u: f64,
    cond_v: f64,
    last_step_times: StepTimes,
    last_reset_drift: f64,
}

/// The orthonormal basis of the projected update plus its coefficient block
/// against the augmented core, shared by the exact and approximate paths.
struct Augmentation {
    vectors: Vec<SvLcov>,
    /// `s x r`: the coefficients of the update columns against the basis;
    /// the transpose goes into the core matrix.
    p: SmallDense,
}

impl TruncatedSvdState {
    /// Build a state from an existing truncated factorization. The inner
    /// factors start as identities.
    pub fn init(
        u: DenseTallMatrix,
        sigma: Vec<f64>,
        v: DenseTallMatrix,
    ) -> Result<Self, EngineError> {
        let k = sigma.len();
        if k == 0 || u.cols() != k || v.cols() != k {
            return Err(EngineError::Shape(format!(
                "init: U has {} cols, V has {} cols, sigma has {k} entries",
                u.cols(),
                v.cols()
            )));
        }
        let ue = u.orthonormality_error();
        if !ue.is_finite() || ue > INIT_ORTHO_TOL {
            return Err(EngineError::NotOrthonormal { err: ue });
        }
        let ve = v.orthonormality_error();
        if !ve.is_finite() || ve > INIT_ORTHO_TOL {
            return Err(EngineError::NotOrthonormal { err: ve });
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(EngineError::BadSigma("entries must be finite and nonnegative".into()));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(EngineError::BadSigma("entries must be sorted descending".into()));
        }
        Ok(Self {
            m: u.rows(),
            n: v.rows(),
            k,
            u_prime: u,
            u_dd: SmallDense::identity(k),
            sigma,
            v_dd: SmallDense::identity(k),
            v_prime: v,
            update_count: 0,
            reset_count: 0,
            cond_u: 1.0,
            cond_v: 1.0,
            last_step_times: StepTimes::default(),
            last_reset_drift: 0.0,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn reset_count(&self) -> u64 {
        self.reset_count
    }

    pub fn cond_estimates(&self) -> (f64, f64) {
        (self.cond_u, self.cond_v)
    }

    pub fn last_step_times(&self) -> StepTimes {
        self.last_step_times
    }

    pub fn last_reset_drift(&self) -> f64 {
        self.last_reset_drift
    }

    #[cfg(test)]
    pub(crate) fn factors(
        &self,
    ) -> (&DenseTallMatrix, &SmallDense, &[f64], &SmallDense, &DenseTallMatrix) {
        (&self.u_prime, &self.u_dd, &self.sigma, &self.v_dd, &self.v_prime)
    }

    #[cfg(test)]
    pub(crate) fn inject_u_dd(&mut self, u_dd: SmallDense) {
        self.u_dd = u_dd;
    }

    /// Apply one batch.
    pub fn apply(&mut self, batch: &UpdateBatch, cfg: &VariantConfig) -> Result<(), EngineError> {
        match batch {
            UpdateBatch::AddRows(e_rt) => self.add_rows(e_rt, cfg),
            UpdateBatch::AddColumns(e_c) => self.add_columns(e_c, cfg),
            UpdateBatch::UpdateWeights { d, e } => self.update_weights(d, e, cfg),
        }
    }

    /// Append `s` columns. The state afterwards represents the rank-k SVD of
    /// the previous reconstruction with the new columns attached.
    pub fn add_columns(
        &mut self,
        e_c: &SparseMatrix,
        cfg: &VariantConfig,
    ) -> Result<(), EngineError> {
        if e_c.rows() != self.m {
            return Err(EngineError::Shape(format!(
                "add_columns: update has {} rows, state has {}",
                e_c.rows(),
                self.m
            )));
        }
        let s = e_c.cols();
        if s == 0 {
            self.update_count += 1;
            return Ok(());
        }
        let t0 = Instant::now();
        let (c0, aug) = {
            let space = LcovSpace::with_mixer(&self.u_prime, &self.u_dd);
            let lifted = space.lift_columns(e_c)?;
            let c0 = coeff_block(&lifted, self.k);
            let aug = build_augmentation(&space, lifted, cfg, cfg.seed)?;
            (c0, aug)
        };
        let r_len = aug.vectors.len();
        let pre = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        // Core: [diag(sigma) c0; 0 Pᵀ], size (k + r) x (k + s).
        let mut core = SmallDense::zeros(self.k + r_len, self.k + s);
        for (i, &sv) in self.sigma.iter().enumerate() {
            core.set(i, i, sv);
        }
        for i in 0..self.k {
            for j in 0..s {
                core.set(i, self.k + j, c0.get(i, j));
            }
        }
        for i in 0..r_len {
            for j in 0..s {
                core.set(self.k + i, self.k + j, aug.p.get(j, i));
            }
        }
        let (f, theta, g) = small_svd(&core, self.k)?;
        let svd_t = t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let f_top = f.block(0..self.k, 0..self.k);
        let f_bot = f.block(self.k..self.k + r_len, 0..self.k);
        let c_basis = coeff_block(&aug.vectors, self.k);
        let u_dd_new = self.u_dd.matmul(&f_top.sub(&c_basis.matmul(&f_bot)?))?;
        let g_top = g.block(0..self.k, 0..self.k);
        let g_bot = g.block(self.k..self.k + s, 0..self.k);
        let v_dd_new = self.v_dd.matmul(&g_top)?;

        // All fallible work happens before any mutation.
        match (u_dd_new.inverse_with_cond(), v_dd_new.inverse_with_cond()) {
            (Ok((u_inv, cond_u)), Ok((v_inv, cond_v))) => {
                let w_u = f_bot.matmul(&u_inv)?;
                let new_v_rows = g_bot.matmul(&v_inv)?;
                let b = basis_to_sparse(self.m, aug.vectors);
                sparse_axpy_block(&mut self.u_prime, &b, &w_u)?;
                self.u_dd = u_dd_new;
                self.v_dd = v_dd_new;
                for i in 0..s {
                    self.v_prime.append_row(new_v_rows.row(i));
                }
                self.cond_u = cond_u;
                self.cond_v = cond_v;
            }
            _ => {
                // One-step conditioning blow-up: materialize the rotated
                // factors directly; the inner factors return to identity.
                let u_full = self.materialize_u()?.matmul_small(&f_top)?;
                let mut u_full = u_full;
                let b = basis_to_sparse(self.m, aug.vectors);
                sparse_axpy_block(&mut u_full, &b, &f_bot)?;
                let mut v_full = self.materialize_v()?.matmul_small(&g_top)?;
                for i in 0..s {
                    v_full.append_row(g_bot.row(i));
                }
                self.u_prime = u_full;
                self.v_prime = v_full;
                self.u_dd = SmallDense::identity(self.k);
                self.v_dd = SmallDense::identity(self.k);
                self.cond_u = 1.0;
                self.cond_v = 1.0;
                self.reset_count += 1;
            }
        }
        self.sigma = theta;
        self.n += s;
        self.update_count += 1;
        let post = t2.elapsed().as_secs_f64();
        self.last_step_times = StepTimes { pre_svd: pre, svd: svd_t, post_svd: post };
        self.maybe_reset(cfg)?;
        Ok(())
    }

    /// Append `s` rows, supplied as the transpose (one column per new row).
    pub fn add_rows(
        &mut self,
        e_rt: &SparseMatrix,
        cfg: &VariantConfig,
    ) -> Result<(), EngineError> {
        if e_rt.rows() != self.n {
            return Err(EngineError::Shape(format!(
                "add_rows: update (transposed) has {} rows, state has {} columns",
                e_rt.rows(),
                self.n
            )));
        }
        let s = e_rt.cols();
        if s == 0 {
            self.update_count += 1;
            return Ok(());
        }
        let t0 = Instant::now();
        let (c0, aug) = {
            let space = LcovSpace::with_mixer(&self.v_prime, &self.v_dd);
            let lifted = space.lift_columns(e_rt)?;
            let c0 = coeff_block(&lifted, self.k);
            let aug = build_augmentation(&space, lifted, cfg, cfg.seed)?;
            (c0, aug)
        };
        let r_len = aug.vectors.len();
        let pre = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        // Core: [diag(sigma) 0; c0ᵀ P], size (k + s) x (k + r).
        let mut core = SmallDense::zeros(self.k + s, self.k + r_len);
        for (i, &sv) in self.sigma.iter().enumerate() {
            core.set(i, i, sv);
        }
        for i in 0..s {
            for j in 0..self.k {
                core.set(self.k + i, j, c0.get(j, i));
            }
        }
        for i in 0..s {
            for j in 0..r_len {
                core.set(self.k + i, self.k + j, aug.p.get(i, j));
            }
        }
        let (f, theta, g) = small_svd(&core, self.k)?;
        let svd_t = t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let f_top = f.block(0..self.k, 0..self.k);
        let f_bot = f.block(self.k..self.k + s, 0..self.k);
        let g_top = g.block(0..self.k, 0..self.k);
        let g_bot = g.block(self.k..self.k + r_len, 0..self.k);
        let c_basis = coeff_block(&aug.vectors, self.k);
        let u_dd_new = self.u_dd.matmul(&f_top)?;
        let v_dd_new = self.v_dd.matmul(&g_top.sub(&c_basis.matmul(&g_bot)?))?;

        match (u_dd_new.inverse_with_cond(), v_dd_new.inverse_with_cond()) {
            (Ok((u_inv, cond_u)), Ok((v_inv, cond_v))) => {
                let new_u_rows = f_bot.matmul(&u_inv)?;
                let w_v = g_bot.matmul(&v_inv)?;
                let b = basis_to_sparse(self.n, aug.vectors);
                sparse_axpy_block(&mut self.v_prime, &b, &w_v)?;
                self.u_dd = u_dd_new;
                self.v_dd = v_dd_new;
                for i in 0..s {
                    self.u_prime.append_row(new_u_rows.row(i));
                }
                self.cond_u = cond_u;
                self.cond_v = cond_v;
            }
            _ => {
                let mut u_full = self.materialize_u()?.matmul_small(&f_top)?;
                for i in 0..s {
                    u_full.append_row(f_bot.row(i));
                }
                let mut v_full = self.materialize_v()?.matmul_small(&g_top)?;
                let b = basis_to_sparse(self.n, aug.vectors);
                sparse_axpy_block(&mut v_full, &b, &g_bot)?;
                self.u_prime = u_full;
                self.v_prime = v_full;
                self.u_dd = SmallDense::identity(self.k);
                self.v_dd = SmallDense::identity(self.k);
                self.cond_u = 1.0;
                self.cond_v = 1.0;
                self.reset_count += 1;
            }
        }
        self.sigma = theta;
        self.m += s;
        self.update_count += 1;
        let post = t2.elapsed().as_secs_f64();
        self.last_step_times = StepTimes { pre_svd: pre, svd: svd_t, post_svd: post };
        self.maybe_reset(cfg)?;
        Ok(())
    }

    /// Low-rank weight modification: the state afterwards represents the
    /// rank-k SVD of `reconstruction + D Eᵀ`. Dimensions are unchanged.
    pub fn update_weights(
        &mut self,
        d: &SparseMatrix,
        e_m: &SparseMatrix,
        cfg: &VariantConfig,
    ) -> Result<(), EngineError> {
        if d.rows() != self.m || e_m.rows() != self.n || d.cols() != e_m.cols() {
            return Err(EngineError::Shape(format!(
                "update_weights: D is {}x{}, E is {}x{}, state is {}x{}",
                d.rows(),
                d.cols(),
                e_m.rows(),
                e_m.cols(),
                self.m,
                self.n
            )));
        }
        let s = d.cols();
        if s == 0 {
            self.update_count += 1;
            return Ok(());
        }
        let (seed_d, seed_e) = weight_side_seeds(cfg.seed);
        let t0 = Instant::now();
        let (c0d, aug_d) = {
            let space = LcovSpace::with_mixer(&self.u_prime, &self.u_dd);
            let lifted = space.lift_columns(d)?;
            let c0 = coeff_block(&lifted, self.k);
            (c0, build_augmentation(&space, lifted, cfg, seed_d)?)
        };
        let (c0e, aug_e) = {
            let space = LcovSpace::with_mixer(&self.v_prime, &self.v_dd);
            let lifted = space.lift_columns(e_m)?;
            let c0 = coeff_block(&lifted, self.k);
            (c0, build_augmentation(&space, lifted, cfg, seed_e)?)
        };
        let rd = aug_d.vectors.len();
        let re = aug_e.vectors.len();
        let pre = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        // Core: [diag(sigma) 0; 0 0] + [c0d; Pdᵀ] [c0e; Peᵀ]ᵀ.
        let left = SmallDense::vstack(&c0d, &aug_d.p.transpose());
        let right = SmallDense::vstack(&c0e, &aug_e.p.transpose());
        let mut core = left.matmul_nt(&right)?;
        for (i, &sv) in self.sigma.iter().enumerate() {
            let v = core.get(i, i) + sv;
            core.set(i, i, v);
        }
        let (f, theta, g) = small_svd(&core, self.k)?;
        let svd_t = t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let f_top = f.block(0..self.k, 0..self.k);
        let f_bot = f.block(self.k..self.k + rd, 0..self.k);
        let g_top = g.block(0..self.k, 0..self.k);
        let g_bot = g.block(self.k..self.k + re, 0..self.k);
        let cd = coeff_block(&aug_d.vectors, self.k);
        let ce = coeff_block(&aug_e.vectors, self.k);
        let u_dd_new = self.u_dd.matmul(&f_top.sub(&cd.matmul(&f_bot)?))?;
        let v_dd_new = self.v_dd.matmul(&g_top.sub(&ce.matmul(&g_bot)?))?;

        match (u_dd_new.inverse_with_cond(), v_dd_new.inverse_with_cond()) {
            (Ok((u_inv, cond_u)), Ok((v_inv, cond_v))) => {
                let w_u = f_bot.matmul(&u_inv)?;
                let w_v = g_bot.matmul(&v_inv)?;
                let bd = basis_to_sparse(self.m, aug_d.vectors);
                let be = basis_to_sparse(self.n, aug_e.vectors);
                sparse_axpy_block(&mut self.u_prime, &bd, &w_u)?;
                sparse_axpy_block(&mut self.v_prime, &be, &w_v)?;
                self.u_dd = u_dd_new;
                self.v_dd = v_dd_new;
                self.cond_u = cond_u;
                self.cond_v = cond_v;
            }
            _ => {
                let mut u_full = self.materialize_u()?.matmul_small(&f_top)?;
                let bd = basis_to_sparse(self.m, aug_d.vectors);
                sparse_axpy_block(&mut u_full, &bd, &f_bot)?;
                let mut v_full = self.materialize_v()?.matmul_small(&g_top)?;
                let be = basis_to_sparse(self.n, aug_e.vectors);
                sparse_axpy_block(&mut v_full, &be, &g_bot)?;
                self.u_prime = u_full;
                self.v_prime = v_full;
                self.u_dd = SmallDense::identity(self.k);
                self.v_dd = SmallDense::identity(self.k);
                self.cond_u = 1.0;
                self.cond_v = 1.0;
                self.reset_count += 1;
            }
        }
        self.sigma = theta;
        self.update_count += 1;
        let post = t2.elapsed().as_secs_f64();
        self.last_step_times = StepTimes { pre_svd: pre, svd: svd_t, post_svd: post };
        self.maybe_reset(cfg)?;
        Ok(())
    }

    /// Row `i` of the left singular factor plus the singular values, in
    /// O(k^2) independent of the matrix dimensions.
    pub fn query_left(&self, i: usize) -> Result<(Vec<f64>, Vec<f64>), EngineError> {
        if i >= self.m {
            return Err(EngineError::Oob { index: i, len: self.m });
        }
        Ok((compose_row(self.u_prime.row(i), &self.u_dd), self.sigma.clone()))
    }

    /// Row `j` of the right singular factor plus the singular values.
    pub fn query_right(&self, j: usize) -> Result<(Vec<f64>, Vec<f64>), EngineError> {
        if j >= self.n {
            return Err(EngineError::Oob { index: j, len: self.n });
        }
        Ok((compose_row(self.v_prime.row(j), &self.v_dd), self.sigma.clone()))
    }

    /// Materialized left factor `U' U''` (m x k).
    pub fn materialize_u(&self) -> Result<DenseTallMatrix, EngineError> {
        Ok(self.u_prime.matmul_small(&self.u_dd)?)
    }

    /// Materialized right factor `V' V''` (n x k).
    pub fn materialize_v(&self) -> Result<DenseTallMatrix, EngineError> {
        Ok(self.v_prime.matmul_small(&self.v_dd)?)
    }

    /// Full dense reconstruction; guarded by a size cap.
    pub fn reconstruct(&self) -> Result<SmallDense, EngineError> {
        if self.m.saturating_mul(self.n) > MATERIALIZE_CAP {
            return Err(EngineError::TooLarge {
                rows: self.m,
                cols: self.n,
                cap: MATERIALIZE_CAP,
            });
        }
        let us = self.materialize_u()?.matmul_small(&SmallDense::diag(&self.sigma))?;
        let v = self.materialize_v()?;
        let mut out = SmallDense::zeros(self.m, self.n);
        for i in 0..self.m {
            let ri = us.row(i);
            for j in 0..self.n {
                let rj = v.row(j);
                out.set(i, j, ri.iter().zip(rj).map(|(a, b)| a * b).sum());
            }
        }
        Ok(out)
    }

    /// Re-orthonormalize: fold the inner factors into the tall factors via
    /// thin QR, re-solve the k x k core, and reset the inner factors to the
    /// identity. Returns the relative Frobenius change of the reconstruction
    /// (should be at rounding level).
    pub fn health_reset(&mut self) -> Result<f64, EngineError> {
        let u_full = self.materialize_u()?;
        let v_full = self.materialize_v()?;
        let (qu, ru) = u_full.mgs_qr();
        let (qv, rv) = v_full.mgs_qr();
        let mid = ru.mul_diag_right(&self.sigma).matmul_nt(&rv)?;
        let (f, theta, g) = small_svd(&mid, self.k)?;
        let u_new = qu.matmul_small(&f)?;
        let v_new = qv.matmul_small(&g)?;

        // The change of basis through the thin QRs is orthogonal, so the
        // reconstruction moves only by the refactorization error of the
        // k x k core.
        let refit = f.mul_diag_right(&theta).matmul_nt(&g)?;
        let mid_norm = mid.frobenius_norm().max(1e-300);
        let drift = mid.sub(&refit).frobenius_norm() / mid_norm;
        self.u_prime = u_new;
        self.v_prime = v_new;
        self.u_dd = SmallDense::identity(self.k);
        self.v_dd = SmallDense::identity(self.k);
        self.sigma = theta;
        self.cond_u = 1.0;
        self.cond_v = 1.0;
        self.reset_count += 1;
        self.last_reset_drift = drift;
        Ok(drift)
    }

    fn maybe_reset(&mut self, cfg: &VariantConfig) -> Result<(), EngineError> {
        if self.cond_u.max(self.cond_v) > cfg.reset_threshold {
            self.health_reset()?;
        }
        Ok(())
    }

    /// Check the state's own invariants; used by tests and the CLI verify
    /// flag. Costs O((m + n) k^2).
    pub fn verify_invariants(&self) -> Result<(), EngineError> {
        let ue = self.materialize_u()?.orthonormality_error();
        if !(ue <= STATE_ORTHO_TOL) {
            return Err(EngineError::NotOrthonormal { err: ue });
        }
        let ve = self.materialize_v()?.orthonormality_error();
        if !(ve <= STATE_ORTHO_TOL) {
            return Err(EngineError::NotOrthonormal { err: ve });
        }
        if self.sigma.iter().any(|s| !s.is_finite() || *s < 0.0)
            || self.sigma.windows(2).any(|w| w[0] < w[1])
        {
            return Err(EngineError::BadSigma("state sigma invalid".into()));
        }
        Ok(())
    }
}

fn compose_row(row: &[f64], inner: &SmallDense) -> Vec<f64> {
    let k = inner.cols();
    let mut out = vec![0.0; k];
    for (p, &x) in row.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &w) in out.iter_mut().zip(inner.row(p)) {
            *o += x * w;
        }
    }
    out
}

fn coeff_block(tuples: &[SvLcov], k: usize) -> SmallDense {
    SmallDense::from_fn(k, tuples.len(), |i, j| tuples[j].c()[i])
}

fn basis_to_sparse(dim: usize, tuples: Vec<SvLcov>) -> SparseMatrix {
    let cols: Vec<SparseVector> = tuples.into_iter().map(|t| t.into_parts().0).collect();
    SparseMatrix::from_columns(dim, cols)
}

fn build_augmentation(
    space: &LcovSpace<'_>,
    lifted: Vec<SvLcov>,
    cfg: &VariantConfig,
    seed: u64,
) -> Result<Augmentation, EngineError> {
    let s = lifted.len();
    match cfg.mode {
        UpdateMode::Exact => {
            let basis = LcovSpace::qr_from(lifted);
            Ok(Augmentation { vectors: basis.vectors, p: basis.r.transpose() })
        }
        UpdateMode::Gkl => {
            let l = cfg.l.max(1).min(s);
            let ApproxBasis { vectors, p } = space.gkl_from(&lifted, l, seed)?;
            Ok(Augmentation { vectors, p })
        }
        UpdateMode::Rpi => {
            let l = cfg.l.max(1).min(s);
            let ApproxBasis { vectors, p } = space.rpi_from(&lifted, l, cfg.t.max(1), seed)?;
            Ok(Augmentation { vectors, p })
        }
    }
}

mod state_io;

#[cfg(test)]
mod tests;
