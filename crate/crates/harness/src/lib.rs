//! Experiment harness around `seqaudit-core`: benchmark tables, the
//! decoupling grid, synthetic power studies, DP-SGD canary audits, the
//! simplified fixed-batch comparator, and CSV output.

pub mod batch;
pub mod config;
pub mod csv_out;
pub mod experiments;
pub mod summary;

use std::path::PathBuf;
use std::sync::OnceLock;

pub use config::ExperimentConfig;

/// Harness-level failure; maps onto the CLI exit codes (usage → 1, I/O → 2).
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("usage error: {0}")]
    Core(#[from] seqaudit_core::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) | HarnessError::Core(_) => 1,
            HarnessError::Io { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Worker pool for replication fan-out. `SEQAUDIT_THREADS` (integer ≥ 1)
/// caps the worker count; otherwise all cores are used. Replications are
/// seeded per index and collected in order, so results do not depend on the
/// pool size.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = configured_threads() {
            builder = builder.num_threads(n);
        }
        builder.build().expect("thread pool")
    })
}

/// Parsed `SEQAUDIT_THREADS`, if set to a valid integer ≥ 1.
pub fn configured_threads() -> Option<usize> {
    std::env::var("SEQAUDIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
}
