//! Experiment manifests, orchestration and artifact output for the clock simulator.

pub mod artifacts;
mod error;
pub mod experiments;
pub mod manifest;

pub use error::{HResult, HarnessError};
pub use experiments::{audit_reports, run_experiment, trajectory_seed, RunOutcome};
pub use manifest::{ExperimentKind, ExperimentManifest};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "TICKGATE_THREADS";

/// Size the global rayon pool: explicit value, then the environment, then
/// available parallelism. Later calls are ignored.
pub fn init_threads(explicit: Option<usize>) {
    let n = explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}
