//! Batch-update experiment driver and metrics: streaming protocols over
//! adjacency and rating matrices, link-prediction average precision,
//! collaborative-filtering MSE, reconstruction drift and runtime
//! measurement, for both the maintained engine and the dense rivals.

use crate::baselines::{
    dense_gkl_add_columns_timed, dense_gkl_add_rows, dense_rpi_add_columns_timed,
    dense_rpi_add_rows, initial_svd, zha_simon_add_columns_timed, zha_simon_add_rows_timed,
    BaselineError, DenseSvdTriple,
};
use crate::dense::DenseTallMatrix;
use crate::engine::{EngineError, TruncatedSvdState, VariantConfig};
use crate::rng::{random_sparse_matrix_nnz, seeded_orthonormal_tall, Rng64};
use crate::sparse::SparseMatrix;
use crate::{LinAlgError, StepTimes};
use std::collections::HashSet;
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("bad experiment plan: {0}")]
    BadPlan(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    LinkPrediction,
    CollabFiltering,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Engine,
    ZhaSimon,
    DenseGkl,
    DenseRpi,
}

/// One streaming experiment: which task protocol, which rank, how many
/// batches, which update method and variant.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ExperimentPlan {
    pub task: Task,
    pub k: usize,
    pub phi: usize,
    pub variant: VariantConfig,
    pub method: Method,
    pub seed: u64,
}

/// Metrics of one run. Runtimes cover the update stream (not the initial
/// factorization); the three step buckets sum to the total by construction.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MetricsReport {
    pub runtime_total: f64,
    pub pre_svd: f64,
    pub svd: f64,
    pub post_svd: f64,
    pub frobenius_norm: f64,
    pub ap: Option<f64>,
    pub mse: Option<f64>,
}

impl MetricsReport {
    fn from_times(times: StepTimes, frobenius_norm: f64) -> Self {
        Self {
            runtime_total: times.total(),
            pre_svd: times.pre_svd,
            svd: times.svd,
            post_svd: times.post_svd,
            frobenius_norm,
            ap: None,
            mse: None,
        }
    }
}

/// Anything that can serve the left/right factors plus singular values for
/// scoring: the maintained state or a dense triple.
pub trait EmbeddingSource {
    fn left(&self) -> Result<DenseTallMatrix, EvalError>;
    fn right(&self) -> Result<DenseTallMatrix, EvalError>;
    fn sigma(&self) -> &[f64];
}

impl EmbeddingSource for TruncatedSvdState {
    fn left(&self) -> Result<DenseTallMatrix, EvalError> {
        Ok(self.materialize_u()?)
    }

    fn right(&self) -> Result<DenseTallMatrix, EvalError> {
        Ok(self.materialize_v()?)
    }

    fn sigma(&self) -> &[f64] {
        self.sigma()
    }
}

impl EmbeddingSource for DenseSvdTriple {
    fn left(&self) -> Result<DenseTallMatrix, EvalError> {
        Ok(self.u.clone())
    }

    fn right(&self) -> Result<DenseTallMatrix, EvalError> {
        Ok(self.v.clone())
    }

    fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

fn pair_score(u: &DenseTallMatrix, sigma: &[f64], v: &DenseTallMatrix, i: usize, j: usize) -> f64 {
    u.row(i)
        .iter()
        .zip(sigma)
        .zip(v.row(j))
        .map(|((a, s), b)| a * s * b)
        .sum()
}

/// Fraction of true positives among the top-|positives| scored test pairs.
/// For undirected graphs the score of a pair is the larger of the two
/// orientations.
pub fn average_precision(
    source: &dyn EmbeddingSource,
    pairs: &[(usize, usize, bool)],
    undirected: bool,
) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::BadPlan("empty link-prediction test set".into()));
    }
    let u = source.left()?;
    let v = source.right()?;
    let sigma = source.sigma();
    let mut scored: Vec<(f64, bool)> = pairs
        .iter()
        .map(|&(i, j, label)| {
            let mut s = pair_score(&u, sigma, &v, i, j);
            if undirected {
                s = s.max(pair_score(&u, sigma, &v, j, i));
            }
            (s, label)
        })
        .collect();
    let positives = scored.iter().filter(|(_, l)| *l).count();
    if positives == 0 {
        return Err(EvalError::BadPlan("test set has no positive pairs".into()));
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let correct = scored[..positives].iter().filter(|(_, l)| *l).count();
    Ok(correct as f64 / positives as f64)
}

/// Mean squared error of the factored predictions against item-mean-centered
/// ratings. Items never seen in training predict 0, i.e. the item mean.
pub fn mse(
    source: &dyn EmbeddingSource,
    test_ratings: &[(usize, usize, f64)],
    item_means: &[Option<f64>],
) -> Result<f64, EvalError> {
    if test_ratings.is_empty() {
        return Err(EvalError::BadPlan("empty ratings test set".into()));
    }
    let u = source.left()?;
    let v = source.right()?;
    let sigma = source.sigma();
    let mut acc = 0.0;
    for &(user, item, rating) in test_ratings {
        let mean = item_means.get(item).copied().flatten();
        let target = rating - mean.unwrap_or(0.0);
        let pred = if mean.is_some() && user < u.rows() && item < v.rows() {
            pair_score(&u, sigma, &v, user, item)
        } else {
            0.0
        };
        let e = pred - target;
        acc += e * e;
    }
    Ok(acc / test_ratings.len() as f64)
}

/// `||reconstruction - A||_F` without materializing the reconstruction:
/// the factored norm comes from k x k Gram blocks, the cross term iterates
/// the nonzeros of `A`.
pub fn frobenius_drift(source: &dyn EmbeddingSource, a: &SparseMatrix) -> Result<f64, EvalError> {
    let u = source.left()?;
    let v = source.right()?;
    let sigma = source.sigma();
    if u.rows() != a.rows() || v.rows() != a.cols() {
        return Err(EvalError::BadPlan(format!(
            "drift: factors are {}x{}, matrix is {}x{}",
            u.rows(),
            v.rows(),
            a.rows(),
            a.cols()
        )));
    }
    let gu = u.gram();
    let gv = v.gram();
    let k = sigma.len();
    let mut recon_sq = 0.0;
    for i in 0..k {
        for j in 0..k {
            recon_sq += gv.get(i, j) * sigma[j] * gu.get(j, i) * sigma[i];
        }
    }
    let mut cross = 0.0;
    for (i, j, val) in a.iter_entries() {
        cross += val * pair_score(&u, sigma, &v, i, j);
    }
    let a_sq = a.frobenius_norm().powi(2);
    Ok((recon_sq - 2.0 * cross + a_sq).max(0.0).sqrt())
}

/// Internal driver: either the engine or one of the dense rivals.
enum Runner {
    Engine(TruncatedSvdState),
    Dense { method: Method, triple: DenseSvdTriple, times: StepTimes },
}

impl Runner {
    fn new(method: Method, init: &DenseSvdTriple) -> Result<Self, EvalError> {
        match method {
            Method::Engine => {
                let state =
                    TruncatedSvdState::init(init.u.clone(), init.sigma.clone(), init.v.clone())?;
                Ok(Runner::Engine(state))
            }
            _ => Ok(Runner::Dense { method, triple: init.clone(), times: StepTimes::default() }),
        }
    }

    fn add_columns(&mut self, e: &SparseMatrix, cfg: &VariantConfig) -> Result<(), EvalError> {
        if e.cols() == 0 {
            return Ok(());
        }
        match self {
            Runner::Engine(state) => {
                state.add_columns(e, cfg)?;
                Ok(())
            }
            Runner::Dense { method, triple, times } => {
                let (next, t) = match method {
                    Method::ZhaSimon => zha_simon_add_columns_timed(triple, e)?,
                    Method::DenseGkl => dense_gkl_add_columns_timed(triple, e, cfg.l, cfg.seed)?,
                    Method::DenseRpi => {
                        dense_rpi_add_columns_timed(triple, e, cfg.l, cfg.t, cfg.seed)?
                    }
                    Method::Engine => unreachable!(),
                };
                *triple = next;
                times.accumulate(&t);
                Ok(())
            }
        }
    }

    fn add_rows(&mut self, e_rt: &SparseMatrix, cfg: &VariantConfig) -> Result<(), EvalError> {
        if e_rt.cols() == 0 {
            return Ok(());
        }
        match self {
            Runner::Engine(state) => {
                state.add_rows(e_rt, cfg)?;
                Ok(())
            }
            Runner::Dense { method, triple, times } => {
                let next = match method {
                    Method::ZhaSimon => {
                        let (next, t) = zha_simon_add_rows_timed(triple, e_rt)?;
                        times.accumulate(&t);
                        next
                    }
                    Method::DenseGkl => dense_gkl_add_rows(triple, e_rt, cfg.l, cfg.seed)?,
                    Method::DenseRpi => dense_rpi_add_rows(triple, e_rt, cfg.l, cfg.t, cfg.seed)?,
                    Method::Engine => unreachable!(),
                };
                *triple = next;
                Ok(())
            }
        }
    }

    fn source(&self) -> &dyn EmbeddingSource {
        match self {
            Runner::Engine(state) => state,
            Runner::Dense { triple, .. } => triple,
        }
    }
}

/// Per-batch variant configuration: approximate modes draw a fresh seed per
/// batch so seed-matched engine and oracle runs stay aligned batch by batch.
fn batch_cfg(base: &VariantConfig, batch_index: u64) -> VariantConfig {
    let mut cfg = *base;
    cfg.seed = base.seed.wrapping_add(batch_index);
    cfg
}

/// Run one streaming experiment. The matrix is split according to the task
/// protocol, the first half initializes the factorization, the rest streams
/// in `phi` batches, and the task metrics are computed at the end.
pub fn run_streaming(plan: &ExperimentPlan, data: &SparseMatrix) -> Result<MetricsReport, EvalError> {
    if plan.phi == 0 {
        return Err(EvalError::BadPlan("phi must be at least 1".into()));
    }
    if plan.k == 0 {
        return Err(EvalError::BadPlan("k must be at least 1".into()));
    }
    match plan.task {
        Task::LinkPrediction => run_link_prediction(plan, data),
        Task::CollabFiltering => run_collab_filtering(plan, data),
        Task::Synthetic => run_synthetic(plan, data),
    }
}

/// Square streaming: each batch appends a block of rows, then the matching
/// block of columns, keeping the matrix square.
fn stream_square(
    runner: &mut Runner,
    train: &SparseMatrix,
    n0: usize,
    phi: usize,
    variant: &VariantConfig,
) -> Result<StepTimes, EvalError> {
    let n_total = train.rows();
    let mut engine_times = StepTimes::default();
    let step = (n_total - n0).div_ceil(phi).max(1);
    let mut cur = n0;
    for b in 0..phi {
        let hi = (cur + step).min(n_total);
        if hi == cur {
            break;
        }
        let cfg = batch_cfg(variant, b as u64);
        // Rows arrive transposed; symmetry lets the block come straight
        // from the upper wedge.
        let e_rt = train.block(0..cur, cur..hi);
        runner.add_rows(&e_rt, &cfg)?;
        if let Runner::Engine(state) = runner {
            engine_times.accumulate(&state.last_step_times());
        }
        let e_c = train.block(0..hi, cur..hi);
        runner.add_columns(&e_c, &cfg)?;
        if let Runner::Engine(state) = runner {
            engine_times.accumulate(&state.last_step_times());
        }
        cur = hi;
    }
    Ok(match runner {
        Runner::Engine(_) => engine_times,
        Runner::Dense { times, .. } => *times,
    })
}

fn stream_columns(
    runner: &mut Runner,
    train: &SparseMatrix,
    n0: usize,
    phi: usize,
    variant: &VariantConfig,
) -> Result<StepTimes, EvalError> {
    let n_total = train.cols();
    let m = train.rows();
    let mut engine_times = StepTimes::default();
    let step = (n_total - n0).div_ceil(phi).max(1);
    let mut cur = n0;
    let mut b = 0u64;
    while cur < n_total {
        let hi = (cur + step).min(n_total);
        let cfg = batch_cfg(variant, b);
        let e_c = train.block(0..m, cur..hi);
        runner.add_columns(&e_c, &cfg)?;
        if let Runner::Engine(state) = runner {
            engine_times.accumulate(&state.last_step_times());
        }
        cur = hi;
        b += 1;
    }
    Ok(match runner {
        Runner::Engine(_) => engine_times,
        Runner::Dense { times, .. } => *times,
    })
}

fn run_link_prediction(
    plan: &ExperimentPlan,
    data: &SparseMatrix,
) -> Result<MetricsReport, EvalError> {
    if data.rows() != data.cols() {
        return Err(EvalError::BadPlan("adjacency task needs a square matrix".into()));
    }
    let (train, test_pairs) = split_graph_edges(data, 0.3, plan.seed)?;
    let n0 = data.rows() / 2;
    if n0 < plan.k {
        return Err(EvalError::BadPlan("initial block smaller than k".into()));
    }
    let init = initial_svd(&train.block(0..n0, 0..n0), plan.k)?;
    let mut runner = Runner::new(plan.method, &init)?;
    let times = stream_square(&mut runner, &train, n0, plan.phi, &plan.variant)?;
    let norm = frobenius_drift(runner.source(), &train)?;
    let ap = average_precision(runner.source(), &test_pairs, true)?;
    let mut report = MetricsReport::from_times(times, norm);
    report.ap = Some(ap);
    Ok(report)
}

fn run_collab_filtering(
    plan: &ExperimentPlan,
    data: &SparseMatrix,
) -> Result<MetricsReport, EvalError> {
    let (train_entries, test_entries) = split_ratings(data, 0.2, plan.seed);
    if train_entries.is_empty() || test_entries.is_empty() {
        return Err(EvalError::BadPlan("ratings split left an empty side".into()));
    }
    let means = item_means(&train_entries, data.cols());
    let centered: Vec<(usize, usize, f64)> = train_entries
        .iter()
        .map(|&(i, j, v)| (i, j, v - means[j].unwrap_or(0.0)))
        .collect();
    let train = SparseMatrix::from_triplets(data.rows(), data.cols(), &centered);
    let n0 = data.cols() / 2;
    if n0 < plan.k || data.rows() < plan.k {
        return Err(EvalError::BadPlan("initial block smaller than k".into()));
    }
    let init = initial_svd(&train.block(0..data.rows(), 0..n0), plan.k)?;
    let mut runner = Runner::new(plan.method, &init)?;
    let times = stream_columns(&mut runner, &train, n0, plan.phi, &plan.variant)?;
    let norm = frobenius_drift(runner.source(), &train)?;
    let mse_val = mse(runner.source(), &test_entries, &means)?;
    let mut report = MetricsReport::from_times(times, norm);
    report.mse = Some(mse_val);
    Ok(report)
}

fn run_synthetic(plan: &ExperimentPlan, data: &SparseMatrix) -> Result<MetricsReport, EvalError> {
    let square = data.rows() == data.cols();
    let n0 = if square { data.rows() / 2 } else { data.cols() / 2 };
    if n0 < plan.k {
        return Err(EvalError::BadPlan("initial block smaller than k".into()));
    }
    let init = if square {
        initial_svd(&data.block(0..n0, 0..n0), plan.k)?
    } else {
        initial_svd(&data.block(0..data.rows(), 0..n0), plan.k)?
    };
    let mut runner = Runner::new(plan.method, &init)?;
    let times = if square {
        stream_square(&mut runner, data, n0, plan.phi, &plan.variant)?
    } else {
        stream_columns(&mut runner, data, n0, plan.phi, &plan.variant)?
    };
    let norm = frobenius_drift(runner.source(), data)?;
    Ok(MetricsReport::from_times(times, norm))
}

/// Remove `frac` of the undirected edges (upper wedge) as test positives and
/// sample an equal number of never-connected pairs as negatives.
pub fn split_graph_edges(
    adj: &SparseMatrix,
    frac: f64,
    seed: u64,
) -> Result<(SparseMatrix, Vec<(usize, usize, bool)>), EvalError> {
    let n = adj.rows();
    let mut edges: Vec<(usize, usize)> = adj
        .iter_entries()
        .filter(|&(i, j, v)| i < j && v != 0.0)
        .map(|(i, j, _)| (i, j))
        .collect();
    if edges.is_empty() {
        return Err(EvalError::BadPlan("graph has no edges".into()));
    }
    let mut rng = Rng64::new(seed ^ 0x5eed_1234);
    // Fisher-Yates.
    for i in (1..edges.len()).rev() {
        let j = rng.next_range(i + 1);
        edges.swap(i, j);
    }
    let removed = (((edges.len() as f64) * frac).round() as usize).clamp(1, edges.len() - 1);
    let (test_edges, kept_edges) = edges.split_at(removed);

    let mut triplets = Vec::with_capacity(kept_edges.len() * 2);
    for &(i, j) in kept_edges {
        triplets.push((i, j, 1.0));
        triplets.push((j, i, 1.0));
    }
    let train = SparseMatrix::from_triplets(n, n, &triplets);

    let edge_set: HashSet<(usize, usize)> = adj
        .iter_entries()
        .filter(|&(_, _, v)| v != 0.0)
        .map(|(i, j, _)| (i.min(j), i.max(j)))
        .collect();
    let mut pairs: Vec<(usize, usize, bool)> =
        test_edges.iter().map(|&(i, j)| (i, j, true)).collect();
    let mut guard = 0usize;
    let mut negatives = 0usize;
    while negatives < test_edges.len() {
        let i = rng.next_range(n);
        let j = rng.next_range(n);
        guard += 1;
        if guard > 1000 + 100 * n * n {
            return Err(EvalError::BadPlan("could not sample unconnected pairs".into()));
        }
        if i == j {
            continue;
        }
        let key = (i.min(j), i.max(j));
        if edge_set.contains(&key) {
            continue;
        }
        pairs.push((i, j, false));
        negatives += 1;
    }
    Ok((train, pairs))
}

/// Seeded split of rating entries into train and test.
pub fn split_ratings(
    a: &SparseMatrix,
    test_frac: f64,
    seed: u64,
) -> (Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>) {
    let mut entries: Vec<(usize, usize, f64)> = a.iter_entries().collect();
    let mut rng = Rng64::new(seed ^ 0x8a7e_5678);
    for i in (1..entries.len()).rev() {
        let j = rng.next_range(i + 1);
        entries.swap(i, j);
    }
    let test_len = ((entries.len() as f64) * test_frac).round() as usize;
    let test = entries[..test_len].to_vec();
    let train = entries[test_len..].to_vec();
    (train, test)
}

/// Mean rating per item over the training entries; `None` for unseen items.
pub fn item_means(train: &[(usize, usize, f64)], n_items: usize) -> Vec<Option<f64>> {
    let mut sums = vec![0.0; n_items];
    let mut counts = vec![0usize; n_items];
    for &(_, j, v) in train {
        sums[j] += v;
        counts[j] += 1;
    }
    sums.iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect()
}

/// One row of the update-sparsity scaling table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScalingRow {
    pub m: usize,
    pub engine_median: f64,
    pub baseline_median: f64,
}

/// Measure per-update wall time at fixed update sparsity while the row count
/// grows. Each size gets a fresh state with the same k and a stream of
/// add-columns batches carrying exactly `update_nnz` nonzeros.
pub fn scaling_benchmark(
    sizes: &[usize],
    update_nnz: usize,
    s: usize,
    k: usize,
    variant: &VariantConfig,
    reps: usize,
    with_baseline: bool,
) -> Result<Vec<ScalingRow>, EvalError> {
    if sizes.is_empty() || reps == 0 {
        return Err(EvalError::BadPlan("scaling benchmark needs sizes and reps".into()));
    }
    let n0 = 512.max(k * 2);
    let mut rows = Vec::with_capacity(sizes.len());
    for (idx, &m) in sizes.iter().enumerate() {
        if m < k {
            return Err(EvalError::BadPlan(format!("size {m} smaller than k={k}")));
        }
        let seed = 0xbe6c_0000 + idx as u64;
        let u = seeded_orthonormal_tall(m, k, seed)?;
        let v = seeded_orthonormal_tall(n0, k, seed ^ 1)?;
        // The spectrum dominates the update magnitude (steady-state
        // streaming regime), so per-update cost reflects the update path
        // itself rather than occasional conditioning resets.
        let update_scale = (update_nnz as f64 / s.max(1) as f64).sqrt();
        let sigma: Vec<f64> = (0..k).map(|i| (k - i) as f64 * 10.0 * update_scale).collect();
        let mut state = TruncatedSvdState::init(u.clone(), sigma.clone(), v.clone())?;
        let mut triple = DenseSvdTriple { u, sigma, v };

        let mut rng = Rng64::new(seed ^ 2);
        let mut engine_samples = Vec::with_capacity(reps);
        let mut baseline_samples = Vec::with_capacity(reps);
        for r in 0..reps {
            let e = random_sparse_matrix_nnz(m, s, update_nnz, &mut rng);
            let cfg = batch_cfg(variant, r as u64);
            let t0 = Instant::now();
            state.add_columns(&e, &cfg)?;
            engine_samples.push(t0.elapsed().as_secs_f64());
            if with_baseline {
                let t1 = Instant::now();
                triple = crate::baselines::zha_simon_add_columns(&triple, &e)?;
                baseline_samples.push(t1.elapsed().as_secs_f64());
            }
        }
        rows.push(ScalingRow {
            m,
            engine_median: median(&mut engine_samples),
            baseline_median: if with_baseline { median(&mut baseline_samples) } else { 0.0 },
        });
    }
    Ok(rows)
}

/// Log-log slope of per-update time versus row count for the engine and the
/// dense rival, from the first and last rows of a scaling table. A flat
/// method has slope near 0; a dimension-bound one near 1.
pub fn log_slope(rows: &[ScalingRow]) -> Option<(f64, f64)> {
    let (first, last) = (rows.first()?, rows.last()?);
    if first.m == last.m {
        return None;
    }
    let dx = (last.m as f64 / first.m as f64).ln();
    let eng = (last.engine_median.max(1e-12) / first.engine_median.max(1e-12)).ln() / dx;
    let base = (last.baseline_median.max(1e-12) / first.baseline_median.max(1e-12)).ln() / dx;
    Some((eng, base))
}

/// One row of the density sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DensityRow {
    pub density: f64,
    pub engine_median: f64,
    pub baseline_median: f64,
}

/// Vary update density at fixed matrix size; reports per-update medians for
/// the engine and the dense rival.
pub fn density_sweep(
    m: usize,
    densities: &[f64],
    s: usize,
    k: usize,
    variant: &VariantConfig,
    reps: usize,
) -> Result<Vec<DensityRow>, EvalError> {
    let mut rows = Vec::with_capacity(densities.len());
    for &density in densities {
        let nnz = (((m * s) as f64) * density).round().max(1.0) as usize;
        let scaled = scaling_benchmark(&[m], nnz, s, k, variant, reps, true)?;
        let row = &scaled[0];
        rows.push(DensityRow {
            density,
            engine_median: row.engine_median,
            baseline_median: row.baseline_median,
        });
    }
    Ok(rows)
}

pub fn median(samples: &mut [f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples[samples.len() / 2]
}

/// Deterministic synthetic symmetric 0/1 adjacency without self loops.
pub fn synthetic_graph(n: usize, density: f64, seed: u64) -> SparseMatrix {
    let mut rng = Rng64::new(seed);
    let target = (((n * n) as f64) * density / 2.0).round() as usize;
    let mut triplets = Vec::with_capacity(target * 2);
    let mut seen = HashSet::new();
    let mut guard = 0usize;
    while seen.len() < target && guard < 100 * target.max(1) {
        guard += 1;
        let i = rng.next_range(n);
        let j = rng.next_range(n);
        if i == j {
            continue;
        }
        let key = (i.min(j), i.max(j));
        if seen.insert(key) {
            triplets.push((key.0, key.1, 1.0));
            triplets.push((key.1, key.0, 1.0));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets)
}

/// Deterministic synthetic ratings matrix (integer values 1..=5).
pub fn synthetic_ratings(users: usize, items: usize, per_user: usize, seed: u64) -> SparseMatrix {
    let mut rng = Rng64::new(seed);
    let mut triplets = Vec::with_capacity(users * per_user);
    for uix in 0..users {
        let mut cols = HashSet::new();
        while cols.len() < per_user.min(items) {
            let j = rng.next_range(items);
            if cols.insert(j) {
                let rating = 1.0 + rng.next_range(5) as f64;
                triplets.push((uix, j, rating));
            }
        }
    }
    SparseMatrix::from_triplets(users, items, &triplets)
}
