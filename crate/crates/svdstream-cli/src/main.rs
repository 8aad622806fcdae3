use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use svdstream::engine::{UpdateMode, VariantConfig};
use svdstream_cli::commands::{self, OutputMode, QuerySide};
use svdstream_cli::dataset::{DataFormat, DatasetSpec, Normalization};

#[derive(Parser)]
#[command(
    name = "svdstream",
    about = "Maintain a rank-k truncated SVD of a sparse matrix under streaming updates",
    version
)]
struct Cli {
    /// Emit machine-readable line records (one JSON object per line).
    #[arg(long, global = true)]
    json_lines: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    MatrixMarket,
    EdgeList,
    RatingsCsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    None,
    ItemMean,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Exact,
    Gkl,
    Rpi,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an initial factorization from the leading part of a dataset.
    Init {
        /// Dataset path.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        /// Treat edge lists as undirected (adds both edge directions).
        #[arg(long)]
        undirected: bool,
        #[arg(long, value_enum, default_value = "none")]
        normalize: NormalizeArg,
        /// Rank of the maintained factorization.
        #[arg(long)]
        k: usize,
        /// Leading fraction of the dataset used for the initial state.
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
        /// Output state file.
        #[arg(long)]
        state: PathBuf,
        /// Check state invariants before writing.
        #[arg(long)]
        verify: bool,
    },
    /// Apply one update batch to a state file.
    Update {
        #[arg(long)]
        state: PathBuf,
        /// Batch file: a kind header line plus matrix market payload(s).
        #[arg(long)]
        batch: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        variant: VariantArg,
        /// Approximation rank for gkl/rpi variants.
        #[arg(long, default_value_t = 10)]
        l: usize,
        /// Power-iteration count for the rpi variant.
        #[arg(long, default_value_t = 3)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Condition-estimate bound that triggers re-orthonormalization.
        #[arg(long, default_value_t = 1e8)]
        reset_threshold: f64,
        /// Check state invariants after the update.
        #[arg(long)]
        verify: bool,
    },
    /// Print one row of a singular factor and the singular values.
    Query {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        index: usize,
        /// Check state invariants before answering.
        #[arg(long)]
        verify: bool,
    },
    /// Run a streaming experiment plan and report its metrics.
    Bench {
        /// JSON plan file.
        #[arg(long)]
        plan: PathBuf,
        /// Override the plan's rank.
        #[arg(long)]
        k: Option<usize>,
        /// Override the plan's batch count.
        #[arg(long)]
        phi: Option<usize>,
        /// Write the results as a gnuplot-compatible data table.
        #[arg(long)]
        data_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = OutputMode { json_lines: cli.json_lines };
    let result = match cli.cmd {
        Cmd::Init { data, format, undirected, normalize, k, fraction, state, verify } => {
            let spec = DatasetSpec {
                format: match format {
                    FormatArg::MatrixMarket => DataFormat::MatrixMarket,
                    FormatArg::EdgeList => DataFormat::EdgeListTsv,
                    FormatArg::RatingsCsv => DataFormat::RatingsCsv,
                },
                path: data,
                undirected,
                normalization: match normalize {
                    NormalizeArg::None => Normalization::None,
                    NormalizeArg::ItemMean => Normalization::ItemMeanCenter,
                },
            };
            commands::cmd_init(&spec, k, fraction, &state, verify, &out)
        }
        Cmd::Update { state, batch, variant, l, t, seed, reset_threshold, verify } => {
            let cfg = VariantConfig {
                mode: match variant {
                    VariantArg::Exact => UpdateMode::Exact,
                    VariantArg::Gkl => UpdateMode::Gkl,
                    VariantArg::Rpi => UpdateMode::Rpi,
                },
                l,
                t,
                seed,
                reset_threshold,
            };
            commands::cmd_update(&state, &batch, &cfg, verify, &out)
        }
        Cmd::Query { state, side, index, verify } => {
            let side = match side {
                SideArg::Left => QuerySide::Left,
                SideArg::Right => QuerySide::Right,
            };
            commands::cmd_query(&state, side, index, verify, &out)
        }
        Cmd::Bench { plan, k, phi, data_out } => {
            commands::cmd_bench(&plan, k, phi, data_out.as_deref(), &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
