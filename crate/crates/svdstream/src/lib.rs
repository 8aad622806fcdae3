//! Maintenance of a rank-k truncated SVD of a large sparse matrix under
//! streaming structural updates: appended rows, appended columns and low-rank
//! weight modifications.
//!
//! The central data structure is [`engine::TruncatedSvdState`], which stores
//! the factorization as a five-matrix product `U' U'' Σ V''ᵀ V'ᵀ` so that an
//! update costs time proportional to the sparsity of the update instead of
//! the matrix dimensions. Orthogonalization of update columns against the
//! current left (or right) singular subspace happens in the implicit
//! projected form provided by [`lcov`], which never materializes the
//! projected vectors.
//!
//! Dense reference implementations of the classic update schemes live in
//! [`baselines`]; they are used as correctness oracles in the test suite and
//! as rivals in benchmarks. [`eval`] drives batch-update experiments and
//! computes the evaluation metrics (reconstruction drift, link-prediction
//! average precision, collaborative-filtering MSE, per-step runtimes).

pub mod baselines;
pub mod dense;
pub mod engine;
pub mod eval;
pub mod lcov;
pub mod mmio;
pub mod rng;
pub mod sparse;
pub mod svd;
#[doc(hidden)]
pub mod testkit;

pub use dense::{DenseTallMatrix, SmallDense};
pub use engine::{TruncatedSvdState, UpdateBatch, UpdateMode, VariantConfig};
pub use sparse::{SparseMatrix, SparseVector};

/// Cap on dense materialization (entries) used by reconstruction helpers and
/// the dense reference pipelines.
pub const MATERIALIZE_CAP: usize = 4_000_000;

/// Wall-clock split of one update: work before the compact SVD, the compact
/// SVD itself, and the factor updates after it. Seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepTimes {
    pub pre_svd: f64,
    pub svd: f64,
    pub post_svd: f64,
}

impl StepTimes {
    pub fn total(&self) -> f64 {
        self.pre_svd + self.svd + self.post_svd
    }

    pub fn accumulate(&mut self, other: &StepTimes) {
        self.pre_svd += other.pre_svd;
        self.svd += other.svd;
        self.post_svd += other.post_svd;
    }
}

/// Errors raised by the linear-algebra primitives.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinAlgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value encountered: {0}")]
    Numeric(String),
    #[error("svd did not converge within {sweeps} sweeps")]
    SvdFail { sweeps: usize },
    #[error("matrix numerically singular (condition estimate {cond:.3e})")]
    Singular { cond: f64 },
}
