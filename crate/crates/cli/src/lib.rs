//! Command implementations behind the `stochascope` binary: synthesize
//! problem bundles, analyze SA factors, rank partitions and run solvers.
//! Every output is written atomically and is deterministic per seed apart
//! from wall-clock fields.

pub mod analyze;
pub mod bundle;
pub mod io;
pub mod solve;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub use analyze::{cmd_analyze, cmd_compare_partitions, AnalysisRequest, RankEntry};
pub use bundle::{cmd_synth, load_bundle, Manifest, OperatorSpec, ProblemBundle, SynthSpec};
pub use solve::{cmd_solve, parse_configs, read_configs, SolveReport};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "STOCHASCOPE_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    #[default]
    Csv,
}

/// A thread pool sized by `STOCHASCOPE_THREADS` (all cores when unset).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}
