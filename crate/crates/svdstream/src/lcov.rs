//! Implicit projected vectors and their inner-product space.
//!
//! A vector `z = (I - U Uᵀ) b` with sparse `b` is kept as the tuple
//! `(b, c)` with `c = Uᵀ b` instead of being materialized. Scalar
//! multiplication, addition and inner products on tuples cost
//! `O(nnz(b) + k)`, and the map from tuples to the projected vectors they
//! stand for preserves inner products, so Gram-Schmidt orthogonalization of
//! update columns runs at update-sparsity cost. The same trick carries the
//! Golub-Kahan-Lanczos and randomized-power-iteration constructions of an
//! approximate basis for wide updates.

use crate::dense::{DenseTallMatrix, SmallDense, QR_RANK_TOL, QR_REORTH_TRIGGER};
use crate::rng::{seeded_orthonormal_small, seeded_unit_vector};
use crate::sparse::{SparseMatrix, SparseVector};
use crate::LinAlgError;
use std::sync::atomic::{AtomicU64, Ordering};

/// Tuples whose inner products fall below this are treated as Lanczos
/// breakdown: the basis is truncated at its current size.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// Self inner products above this negative bound are clamped to zero;
/// anything lower is genuine numerical trouble handled by the rank policy.
const SELF_DOT_CLAMP: f64 = -1e-12;

static NEXT_BASIS_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, thiserror::Error)]
pub enum LcovError {
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("tuples are bound to different orthonormal bases")]
    BasisMismatch,
}

/// One implicit projected vector: `(I - U Uᵀ) b` for the `U` of the space
/// that produced it.
#[derive(Debug, Clone)]
pub struct SvLcov {
    b: SparseVector,
    c: Vec<f64>,
    basis_id: u64,
}

impl SvLcov {
    pub fn b(&self) -> &SparseVector {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.b.is_empty() && self.c.iter().all(|&x| x == 0.0)
    }

    /// Consume the tuple, yielding the sparse part and the coefficients.
    pub fn into_parts(self) -> (SparseVector, Vec<f64>) {
        (self.b, self.c)
    }

    pub fn scale(&self, alpha: f64) -> Result<SvLcov, LcovError> {
        if !alpha.is_finite() {
            return Err(LinAlgError::Numeric(format!("scale by {alpha}")).into());
        }
        Ok(SvLcov {
            b: self.b.scale(alpha),
            c: self.c.iter().map(|x| alpha * x).collect(),
            basis_id: self.basis_id,
        })
    }

    pub fn add(&self, other: &SvLcov) -> Result<SvLcov, LcovError> {
        if self.basis_id != other.basis_id {
            return Err(LcovError::BasisMismatch);
        }
        Ok(SvLcov {
            b: self.b.add_scaled(1.0, &other.b),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect(),
            basis_id: self.basis_id,
        })
    }

    /// `self - beta * other`, the Gram-Schmidt update step.
    fn sub_scaled(&self, beta: f64, other: &SvLcov) -> SvLcov {
        debug_assert_eq!(self.basis_id, other.basis_id);
        SvLcov {
            b: self.b.add_scaled(-beta, &other.b),
            c: self.c.iter().zip(&other.c).map(|(a, b)| a - beta * b).collect(),
            basis_id: self.basis_id,
        }
    }

    /// Inner product of the projected vectors: `⟨b1,b2⟩ - ⟨c1,c2⟩`.
    pub fn dot(&self, other: &SvLcov) -> Result<f64, LcovError> {
        if self.basis_id != other.basis_id {
            return Err(LcovError::BasisMismatch);
        }
        let raw = self.b.dot(&other.b)
            - self.c.iter().zip(&other.c).map(|(a, b)| a * b).sum::<f64>();
        if std::ptr::eq(self, other) && raw < 0.0 && raw >= SELF_DOT_CLAMP {
            return Ok(0.0);
        }
        Ok(raw)
    }

    /// Squared length under the space's inner product, clamped at zero when
    /// cancellation leaves a tiny negative residue.
    pub fn norm_sq(&self) -> f64 {
        let raw = self.b.norm_sq() - self.c.iter().map(|x| x * x).sum::<f64>();
        if raw < 0.0 && raw >= SELF_DOT_CLAMP {
            0.0
        } else {
            raw
        }
    }

    fn zero_like(&self) -> SvLcov {
        SvLcov {
            b: SparseVector::zeros(self.b.dim()),
            c: vec![0.0; self.c.len()],
            basis_id: self.basis_id,
        }
    }
}

/// Orthonormal basis produced by the Gram-Schmidt pass, together with its R
/// factor.
#[derive(Debug, Clone)]
pub struct SvLcovBasis {
    pub vectors: Vec<SvLcov>,
    pub r: SmallDense,
}

/// Approximate basis of the projected update columns, together with the
/// projection coefficients `P` (update-cols x basis-size).
#[derive(Debug, Clone)]
pub struct ApproxBasis {
    pub vectors: Vec<SvLcov>,
    pub p: SmallDense,
}

/// The inner-product space tied to one orthonormal matrix `U`, given either
/// directly or as a product `U = U' * mixer` so that callers maintaining a
/// factored form never materialize `U`.
pub struct LcovSpace<'a> {
    u_prime: &'a DenseTallMatrix,
    mixer: Option<&'a SmallDense>,
    id: u64,
}

impl<'a> LcovSpace<'a> {
    pub fn new(u: &'a DenseTallMatrix) -> Self {
        Self { u_prime: u, mixer: None, id: NEXT_BASIS_ID.fetch_add(1, Ordering::Relaxed) }
    }

    pub fn with_mixer(u_prime: &'a DenseTallMatrix, mixer: &'a SmallDense) -> Self {
        Self { u_prime, mixer: Some(mixer), id: NEXT_BASIS_ID.fetch_add(1, Ordering::Relaxed) }
    }

    pub fn dim(&self) -> usize {
        self.u_prime.rows()
    }

    pub fn k(&self) -> usize {
        self.mixer.map_or(self.u_prime.cols(), SmallDense::cols)
    }

    /// Turn a sparse vector into its implicit projected form. Costs
    /// `O(k * nnz(b))` plus `O(k^2)` when the basis is factored.
    pub fn lift(&self, b: &SparseVector) -> Result<SvLcov, LcovError> {
        if b.dim() != self.dim() {
            return Err(LinAlgError::Shape(format!(
                "lift: vector dim {} vs basis dim {}",
                b.dim(),
                self.dim()
            ))
            .into());
        }
        let raw = self.u_prime.gather_transpose_vec(b);
        let c = match self.mixer {
            Some(m) => {
                // c = mixerᵀ * (U'ᵀ b)
                let mut out = vec![0.0; m.cols()];
                for (p, &x) in raw.iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    for (o, &w) in out.iter_mut().zip(m.row(p)) {
                        *o += x * w;
                    }
                }
                out
            }
            None => raw,
        };
        Ok(SvLcov { b: b.clone(), c, basis_id: self.id })
    }

    pub fn lift_columns(&self, e: &SparseMatrix) -> Result<Vec<SvLcov>, LcovError> {
        if e.rows() != self.dim() {
            return Err(LinAlgError::Shape(format!(
                "lift: matrix has {} rows, basis dim {}",
                e.rows(),
                self.dim()
            ))
            .into());
        }
        e.columns().iter().map(|col| self.lift(col)).collect()
    }

    /// Dense `b - U c`; test and diagnostics support, O(m k).
    pub fn materialize(&self, x: &SvLcov) -> Vec<f64> {
        let coeff: Vec<f64> = match self.mixer {
            Some(m) => (0..m.rows())
                .map(|i| m.row(i).iter().zip(&x.c).map(|(a, b)| a * b).sum())
                .collect(),
            None => x.c.clone(),
        };
        let mut out = x.b.to_dense();
        for (i, o) in out.iter_mut().enumerate() {
            let reproj: f64 =
                self.u_prime.row(i).iter().zip(&coeff).map(|(a, b)| a * b).sum();
            *o -= reproj;
        }
        out
    }

    /// Gram-Schmidt orthogonalization of the projected update columns,
    /// entirely in tuple form. Returns the orthonormal tuples and the upper
    /// triangular R with nonnegative diagonal; rank-deficient columns come
    /// back as zero tuples with a zero R diagonal.
    pub fn qr(&self, e: &SparseMatrix) -> Result<SvLcovBasis, LcovError> {
        let vectors = self.lift_columns(e)?;
        Ok(Self::qr_from(vectors))
    }

    /// Same as [`LcovSpace::qr`] but starting from already lifted tuples.
    pub fn qr_from(mut vectors: Vec<SvLcov>) -> SvLcovBasis {
        let r = mgs_lcov(&mut vectors);
        SvLcovBasis { vectors, r }
    }

    /// Golub-Kahan-Lanczos construction of an `l`-dimensional approximate
    /// basis. Deterministic for a fixed seed; breakdown truncates the basis.
    pub fn gkl_basis(
        &self,
        e: &SparseMatrix,
        l: usize,
        seed: u64,
    ) -> Result<ApproxBasis, LcovError> {
        let input = self.lift_columns(e)?;
        self.gkl_from(&input, l, seed)
    }

    /// GKL construction from already lifted tuples.
    pub fn gkl_from(
        &self,
        input: &[SvLcov],
        l: usize,
        seed: u64,
    ) -> Result<ApproxBasis, LcovError> {
        let s = input.len();
        if l == 0 || l > s {
            return Err(LinAlgError::Shape(format!("gkl: l={l} out of range for s={s}")).into());
        }
        let mut p_vecs: Vec<Vec<f64>> = vec![seeded_unit_vector(s, seed)];
        let mut q_vecs: Vec<SvLcov> = Vec::with_capacity(l);
        let mut alphas: Vec<f64> = Vec::with_capacity(l);
        let mut betas: Vec<f64> = Vec::with_capacity(l);
        for i in 0..l {
            let mut cand = combine(input, &p_vecs[i], self.id, self.dim(), self.k());
            if i > 0 {
                cand = cand.sub_scaled(betas[i - 1], &q_vecs[i - 1]);
            }
            let alpha = cand.norm_sq().max(0.0).sqrt();
            if alpha < BREAKDOWN_TOL {
                break;
            }
            let qi = cand.scale(1.0 / alpha)?;
            alphas.push(alpha);

            let mut p_next: Vec<f64> =
                input.iter().map(|t| t.dot(&qi).expect("same basis")).collect();
            for (pn, pi) in p_next.iter_mut().zip(&p_vecs[i]) {
                *pn -= alpha * pi;
            }
            // Full reorthogonalization against every previous p vector.
            for prev in &p_vecs {
                let proj = dot_slice(&p_next, prev);
                for (pn, pv) in p_next.iter_mut().zip(prev) {
                    *pn -= proj * pv;
                }
            }
            let beta = dot_slice(&p_next, &p_next).sqrt();
            q_vecs.push(qi);
            if beta < BREAKDOWN_TOL {
                break;
            }
            // The trailing beta still enters P through the extended
            // bidiagonal factor, so it is kept even on the last step.
            betas.push(beta);
            p_next.iter_mut().for_each(|x| *x /= beta);
            p_vecs.push(p_next);
        }
        let p = gkl_projection(&p_vecs, &alphas, &betas, s, q_vecs.len());
        Ok(ApproxBasis { vectors: q_vecs, p })
    }

    /// Randomized-power-iteration construction of an `l`-dimensional
    /// approximate basis. The initial subspace is a seeded orthonormal
    /// matrix; each of the `t` iterations multiplies by the projected update
    /// and re-orthonormalizes in tuple form.
    pub fn rpi_basis(
        &self,
        e: &SparseMatrix,
        l: usize,
        t: usize,
        seed: u64,
    ) -> Result<ApproxBasis, LcovError> {
        let input = self.lift_columns(e)?;
        self.rpi_from(&input, l, t, seed)
    }

    /// RPI construction from already lifted tuples.
    pub fn rpi_from(
        &self,
        input: &[SvLcov],
        l: usize,
        t: usize,
        seed: u64,
    ) -> Result<ApproxBasis, LcovError> {
        let s = input.len();
        if l == 0 || l > s {
            return Err(LinAlgError::Shape(format!("rpi: l={l} out of range for s={s}")).into());
        }
        if t == 0 {
            return Err(LinAlgError::Shape("rpi: t must be at least 1".into()).into());
        }
        let mut p = seeded_orthonormal_small(s, l, seed);
        let mut basis: Vec<SvLcov> = Vec::new();
        for iter in 0..t {
            basis = (0..l)
                .map(|j| {
                    let coeffs: Vec<f64> = (0..s).map(|r| p.get(r, j)).collect();
                    combine(input, &coeffs, self.id, self.dim(), self.k())
                })
                .collect();
            mgs_lcov(&mut basis);
            if iter == 0 && basis.iter().all(SvLcov::is_zero) {
                return Ok(ApproxBasis { vectors: Vec::new(), p: SmallDense::zeros(s, 0) });
            }
            p = SmallDense::from_fn(s, l, |r, j| input[r].dot(&basis[j]).expect("same basis"));
        }
        Ok(ApproxBasis { vectors: basis, p })
    }
}

/// Linear combination `Σ coeffs[t] * input[t]` of tuples sharing a basis.
fn combine(input: &[SvLcov], coeffs: &[f64], fallback_id: u64, dim: usize, k: usize) -> SvLcov {
    debug_assert_eq!(input.len(), coeffs.len());
    let basis_id = input.first().map_or(fallback_id, |t| t.basis_id);
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    let mut c = vec![0.0; k];
    for (tuple, &w) in input.iter().zip(coeffs) {
        debug_assert_eq!(tuple.basis_id, basis_id);
        if w == 0.0 {
            continue;
        }
        for (idx, v) in tuple.b.iter() {
            pairs.push((idx, w * v));
        }
        for (acc, &cv) in c.iter_mut().zip(&tuple.c) {
            *acc += w * cv;
        }
    }
    SvLcov { b: SparseVector::from_pairs(dim, &pairs), c, basis_id }
}

/// Modified Gram-Schmidt over tuples, mirroring the dense column policy:
/// same rank tolerance, same zeroing, same conditional second pass.
fn mgs_lcov(vectors: &mut [SvLcov]) -> SmallDense {
    let r1 = mgs_lcov_sweep(vectors);
    if lcov_gram_offdiag(vectors) > QR_REORTH_TRIGGER {
        let r2 = mgs_lcov_sweep(vectors);
        return r2.matmul(&r1).expect("square R factors");
    }
    r1
}

fn mgs_lcov_sweep(vectors: &mut [SvLcov]) -> SmallDense {
    let s = vectors.len();
    let mut r = SmallDense::zeros(s, s);
    let norms0: Vec<f64> = vectors.iter().map(|v| v.norm_sq().max(0.0).sqrt()).collect();
    for i in 0..s {
        let alpha = vectors[i].norm_sq().max(0.0).sqrt();
        if alpha <= QR_RANK_TOL * norms0[i] {
            vectors[i] = vectors[i].zero_like();
            continue;
        }
        r.set(i, i, alpha);
        vectors[i] = vectors[i].scale(1.0 / alpha).expect("finite scale");
        let (head, tail) = vectors.split_at_mut(i + 1);
        let qi = &head[i];
        for (off, vj) in tail.iter_mut().enumerate() {
            let beta = qi.dot(vj).expect("same basis");
            r.set(i, i + 1 + off, beta);
            *vj = vj.sub_scaled(beta, qi);
        }
    }
    r
}

fn lcov_gram_offdiag(vectors: &[SvLcov]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            worst = worst.max(vectors[i].dot(&vectors[j]).expect("same basis").abs());
        }
    }
    worst
}

/// `P = P_{r+1} Hᵀ` with `H` the extended upper-bidiagonal factor carrying
/// the alphas on the diagonal and the betas on the superdiagonal.
pub(crate) fn gkl_projection(
    p_vecs: &[Vec<f64>],
    alphas: &[f64],
    betas: &[f64],
    s: usize,
    r: usize,
) -> SmallDense {
    SmallDense::from_fn(s, r, |t, j| {
        let mut v = alphas[j] * p_vecs[j][t];
        if j < betas.len() && j + 1 < p_vecs.len() {
            v += betas[j] * p_vecs[j + 1][t];
        }
        v
    })
}

fn dot_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
