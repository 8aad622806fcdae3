//! Subcommand implementations. Writes are atomic (temp file + rename) and
//! guarded by an advisory lock; reads are lock-free. Every command can emit
//! a machine-readable line record instead of the human text.

use crate::dataset::{load_dataset, resolve_path, DatasetSpec};
use crate::lock::StateLock;
use crate::{batch, CliError};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use svdstream::baselines::initial_svd;
use svdstream::engine::{EngineError, TruncatedSvdState, VariantConfig};
use svdstream::eval::{self, ExperimentPlan, MetricsReport};
use svdstream::sparse::SparseMatrix;

pub struct OutputMode {
    pub json_lines: bool,
}

impl OutputMode {
    fn record<T: Serialize>(&self, kind: &str, human: String, payload: &T) {
        if self.json_lines {
            let mut value = serde_json::to_value(payload).expect("serializable record");
            if let serde_json::Value::Object(map) = &mut value {
                map.insert("record".into(), serde_json::Value::String(kind.into()));
            }
            println!("{}", serde_json::to_string(&value).expect("json encoding"));
        } else {
            println!("{human}");
        }
    }
}

fn load_state(path: &Path) -> Result<TruncatedSvdState, CliError> {
    match TruncatedSvdState::load(path) {
        Ok(s) => Ok(s),
        Err(EngineError::StateVersion { found }) => Err(CliError::StateVersion(found)),
        Err(e) => Err(e.into()),
    }
}

/// Write the state atomically: serialize to a sibling temp file, then
/// rename over the target.
fn atomic_save(state: &TruncatedSvdState, path: &Path) -> Result<(), CliError> {
    let bytes = state.to_bytes()?;
    let tmp = {
        let mut os = path.as_os_str().to_os_string();
        os.push(format!(".tmp.{}", std::process::id()));
        PathBuf::from(os)
    };
    {
        let mut f = std::fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        f.write_all(&bytes).map_err(|e| CliError::io(&tmp, e))?;
        f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct InitRecord {
    state: String,
    rows: usize,
    cols: usize,
    k: usize,
    sigma_top: f64,
}

/// Build an initial factorization from the leading fraction of a dataset
/// and persist it.
pub fn cmd_init(
    spec: &DatasetSpec,
    k: usize,
    fraction: f64,
    state_path: &Path,
    verify: bool,
    out: &OutputMode,
) -> Result<(), CliError> {
    if !(0.0 < fraction && fraction <= 1.0) {
        return Err(CliError::Usage(format!("fraction {fraction} outside (0, 1]")));
    }
    let data = load_dataset(spec)?;
    let slice = initial_slice(&data, fraction);
    if k == 0 || k > slice.rows().min(slice.cols()) {
        return Err(CliError::Usage(format!(
            "k={k} out of range for initial block {}x{}",
            slice.rows(),
            slice.cols()
        )));
    }
    let triple = initial_svd(&slice, k)?;
    let state = TruncatedSvdState::init(triple.u, triple.sigma, triple.v)?;
    if verify {
        state.verify_invariants()?;
    }
    let _lock = StateLock::acquire(state_path)?;
    atomic_save(&state, state_path)?;
    out.record(
        "init",
        format!(
            "initialized {}x{} rank-{} state from {} -> {}",
            state.rows(),
            state.cols(),
            state.k(),
            spec.path.display(),
            state_path.display()
        ),
        &InitRecord {
            state: state_path.display().to_string(),
            rows: state.rows(),
            cols: state.cols(),
            k: state.k(),
            sigma_top: state.sigma().first().copied().unwrap_or(0.0),
        },
    );
    Ok(())
}

/// Leading block used for initialization: square matrices keep the leading
/// fraction of both sides, rectangular ones keep all rows and the leading
/// fraction of columns.
fn initial_slice(data: &SparseMatrix, fraction: f64) -> SparseMatrix {
    if data.rows() == data.cols() {
        let n0 = ((data.rows() as f64) * fraction).round().max(1.0) as usize;
        let n0 = n0.min(data.rows());
        data.block(0..n0, 0..n0)
    } else {
        let n0 = ((data.cols() as f64) * fraction).round().max(1.0) as usize;
        let n0 = n0.min(data.cols());
        data.block(0..data.rows(), 0..n0)
    }
}

#[derive(Serialize)]
struct UpdateRecord {
    state: String,
    update_count: u64,
    rows: usize,
    cols: usize,
    sigma_top: f64,
    pre_svd: f64,
    svd: f64,
    post_svd: f64,
    resets: u64,
}

pub fn cmd_update(
    state_path: &Path,
    batch_path: &Path,
    cfg: &VariantConfig,
    verify: bool,
    out: &OutputMode,
) -> Result<(), CliError> {
    let _lock = StateLock::acquire(state_path)?;
    let mut state = load_state(state_path)?;
    let batch = batch::read_batch_file(&resolve_path(batch_path))?;
    state.apply(&batch, cfg)?;
    if verify {
        state.verify_invariants()?;
    }
    atomic_save(&state, state_path)?;
    let times = state.last_step_times();
    out.record(
        "update",
        format!(
            "applied batch {} -> {}x{}, update #{} ({} resets so far)",
            batch_path.display(),
            state.rows(),
            state.cols(),
            state.update_count(),
            state.reset_count()
        ),
        &UpdateRecord {
            state: state_path.display().to_string(),
            update_count: state.update_count(),
            rows: state.rows(),
            cols: state.cols(),
            sigma_top: state.sigma().first().copied().unwrap_or(0.0),
            pre_svd: times.pre_svd,
            svd: times.svd,
            post_svd: times.post_svd,
            resets: state.reset_count(),
        },
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuerySide {
    Left,
    Right,
}

#[derive(Serialize)]
struct QueryRecord {
    side: &'static str,
    index: usize,
    row: Vec<f64>,
    sigma: Vec<f64>,
}

pub fn cmd_query(
    state_path: &Path,
    side: QuerySide,
    index: usize,
    verify: bool,
    out: &OutputMode,
) -> Result<(), CliError> {
    let state = load_state(state_path)?;
    if verify {
        state.verify_invariants()?;
    }
    let (row, sigma) = match side {
        QuerySide::Left => state.query_left(index)?,
        QuerySide::Right => state.query_right(index)?,
    };
    let side_name = match side {
        QuerySide::Left => "left",
        QuerySide::Right => "right",
    };
    out.record(
        "query",
        format!(
            "{side_name}[{index}] = {}\nsigma = {}",
            format_vec(&row),
            format_vec(&sigma)
        ),
        &QueryRecord { side: side_name, index, row: row.clone(), sigma: sigma.clone() },
    );
    Ok(())
}

fn format_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Data source of a bench plan: a dataset file or a synthetic generator.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PlanData {
    File { dataset: DatasetSpec },
    SyntheticGraph { synthetic_graph: SyntheticGraphSpec },
    SyntheticRatings { synthetic_ratings: SyntheticRatingsSpec },
}

#[derive(Debug, Clone, Deserialize)]
pub struct SyntheticGraphSpec {
    pub n: usize,
    pub density: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SyntheticRatingsSpec {
    pub users: usize,
    pub items: usize,
    pub per_user: usize,
    pub seed: u64,
}

/// Optional sweep section: the plan is re-run for every (k, phi) pair.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepSpec {
    #[serde(default)]
    pub ks: Vec<usize>,
    #[serde(default)]
    pub phis: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BenchPlanFile {
    #[serde(flatten)]
    pub plan: ExperimentPlan,
    #[serde(flatten)]
    pub data: PlanData,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Serialize)]
struct BenchRecord<'a> {
    k: usize,
    phi: usize,
    #[serde(flatten)]
    report: &'a MetricsReport,
}

pub fn cmd_bench(
    plan_path: &Path,
    k_override: Option<usize>,
    phi_override: Option<usize>,
    data_out: Option<&Path>,
    out: &OutputMode,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(resolve_path(plan_path))
        .map_err(|e| CliError::io(plan_path, e))?;
    let mut parsed: BenchPlanFile = serde_json::from_str(&text)?;
    if let Some(k) = k_override {
        parsed.plan.k = k;
    }
    if let Some(phi) = phi_override {
        parsed.plan.phi = phi;
    }
    let data = match &parsed.data {
        PlanData::File { dataset } => load_dataset(dataset)?,
        PlanData::SyntheticGraph { synthetic_graph } => eval::synthetic_graph(
            synthetic_graph.n,
            synthetic_graph.density,
            synthetic_graph.seed,
        ),
        PlanData::SyntheticRatings { synthetic_ratings } => eval::synthetic_ratings(
            synthetic_ratings.users,
            synthetic_ratings.items,
            synthetic_ratings.per_user,
            synthetic_ratings.seed,
        ),
    };

    let ks = match &parsed.sweep {
        Some(sw) if !sw.ks.is_empty() => sw.ks.clone(),
        _ => vec![parsed.plan.k],
    };
    let phis = match &parsed.sweep {
        Some(sw) if !sw.phis.is_empty() => sw.phis.clone(),
        _ => vec![parsed.plan.phi],
    };

    let mut table = String::from(
        "# k phi runtime_total pre_svd svd post_svd frobenius_norm ap mse\n",
    );
    for &k in &ks {
        for &phi in &phis {
            let mut plan = parsed.plan.clone();
            plan.k = k;
            plan.phi = phi;
            let report = eval::run_streaming(&plan, &data)?;
            table.push_str(&format!(
                "{k} {phi} {:.6} {:.6} {:.6} {:.6} {:.6} {} {}\n",
                report.runtime_total,
                report.pre_svd,
                report.svd,
                report.post_svd,
                report.frobenius_norm,
                report.ap.map_or("nan".to_string(), |v| format!("{v:.6}")),
                report.mse.map_or("nan".to_string(), |v| format!("{v:.6}")),
            ));
            let mut human = format!(
                "method {:?} task {:?} k={k} phi={phi}\n  runtime {:.4}s (pre {:.4}s, svd {:.4}s, post {:.4}s)\n  frobenius norm {:.4}",
                plan.method,
                plan.task,
                report.runtime_total,
                report.pre_svd,
                report.svd,
                report.post_svd,
                report.frobenius_norm
            );
            if let Some(ap) = report.ap {
                human.push_str(&format!("\n  average precision {ap:.4}"));
            }
            if let Some(mse) = report.mse {
                human.push_str(&format!("\n  mse {mse:.6}"));
            }
            out.record("bench", human, &BenchRecord { k, phi, report: &report });
        }
    }
    if let Some(path) = data_out {
        std::fs::write(path, table).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}
