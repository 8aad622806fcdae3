//! Self-contained deterministic pseudo-random generation. Seeded runs must
//! reproduce bit-identical streams forever, so no external RNG crate is
//! used. The generator is xoshiro256++ seeded through splitmix64.

use crate::dense::{DenseTallMatrix, SmallDense};
use crate::sparse::{SparseMatrix, SparseVector};
use crate::LinAlgError;

#[derive(Debug, Clone)]
pub struct Rng64 {
    state: [u64; 4],
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let mut state = [0u64; 4];
        for s in &mut state {
            *s = splitmix64(&mut sm);
        }
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = (s[0].wrapping_add(s[3])).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound).
    pub fn next_range(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64().max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic unit vector of the given dimension.
pub fn seeded_unit_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng64::new(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        if dim > 0 {
            v[0] = 1.0;
        }
        return v;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

pub fn seeded_gaussian_small(rows: usize, cols: usize, seed: u64) -> SmallDense {
    let mut rng = Rng64::new(seed);
    SmallDense::from_fn(rows, cols, |_, _| rng.next_gaussian())
}

pub fn seeded_gaussian_tall(rows: usize, cols: usize, seed: u64) -> DenseTallMatrix {
    let mut rng = Rng64::new(seed);
    DenseTallMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
}

/// Deterministic matrix with orthonormal columns (Gaussian then thin QR).
pub fn seeded_orthonormal_small(rows: usize, cols: usize, seed: u64) -> SmallDense {
    let (q, _) = seeded_gaussian_small(rows, cols, seed).mgs_qr();
    q
}

/// Deterministic tall matrix with orthonormal columns.
pub fn seeded_orthonormal_tall(
    rows: usize,
    cols: usize,
    seed: u64,
) -> Result<DenseTallMatrix, LinAlgError> {
    if cols > rows {
        return Err(LinAlgError::Shape(format!(
            "cannot build {cols} orthonormal columns in dimension {rows}"
        )));
    }
    let (q, _) = seeded_gaussian_tall(rows, cols, seed).mgs_qr();
    Ok(q)
}

/// Seeds for the two independent projection sides of a weight update.
pub fn weight_side_seeds(seed: u64) -> (u64, u64) {
    (seed, seed ^ 0x9e37_79b9_7f4a_7c15)
}

/// Random sparse matrix with roughly `density * rows * cols` nonzeros drawn
/// from a standard normal.
pub fn random_sparse_matrix(rows: usize, cols: usize, density: f64, rng: &mut Rng64) -> SparseMatrix {
    let mut columns = Vec::with_capacity(cols);
    for _ in 0..cols {
        let mut pairs = Vec::new();
        for i in 0..rows {
            if rng.next_f64() < density {
                pairs.push((i, rng.next_gaussian()));
            }
        }
        columns.push(SparseVector::from_pairs(rows, &pairs));
    }
    SparseMatrix::from_columns(rows, columns)
}

/// Random sparse matrix with exactly `nnz` nonzeros spread over the columns.
pub fn random_sparse_matrix_nnz(
    rows: usize,
    cols: usize,
    nnz: usize,
    rng: &mut Rng64,
) -> SparseMatrix {
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols];
    for t in 0..nnz {
        let c = t % cols;
        per_col[c].push((rng.next_range(rows), rng.next_gaussian()));
    }
    let columns = per_col
        .into_iter()
        .map(|pairs| SparseVector::from_pairs(rows, &pairs))
        .collect();
    SparseMatrix::from_columns(rows, columns)
}
