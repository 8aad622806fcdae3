//! Library half of the command-line frontend: dataset ingestion, batch-file
//! parsing and the subcommand implementations, separated from argument
//! parsing so integration tests can drive them directly.

pub mod batch;
pub mod commands;
pub mod dataset;
pub mod lock;

/// Environment variable naming a directory in which relative dataset paths
/// are looked up when they do not resolve from the working directory.
pub const CACHE_DIR_ENV: &str = "SVDSTREAM_CACHE_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Malformed { path: String, line: usize, msg: String },
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("state file version mismatch: {0}")]
    StateVersion(u32),
    #[error(transparent)]
    Engine(#[from] svdstream::engine::EngineError),
    #[error(transparent)]
    Eval(#[from] svdstream::eval::EvalError),
    #[error(transparent)]
    Baseline(#[from] svdstream::baselines::BaselineError),
    #[error("matrix market: {0}")]
    Mm(#[from] svdstream::mmio::MmError),
    #[error("plan file: {0}")]
    Plan(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Process exit status for this error: 2 for usage problems, 1 for
    /// everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
