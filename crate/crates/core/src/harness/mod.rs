//! Experiment runner, bound verifier, CSV emission and comparison tables.

pub mod compare;
pub mod config;
pub mod csvio;
pub mod report;
pub mod run;
pub mod verify;

pub use compare::{compare, run_seeds, Comparison, ComparisonColumn};
pub use config::{
    parse_config, read_config, write_config, Algorithm, ComparatorPolicy, ExperimentConfig,
    IntervalPolicy, AUTO_SAMPLES, EXHAUSTIVE_LIMIT,
};
pub use csvio::{
    read_run, read_run_csv, run_header, write_bound_csv, write_bounds, write_comparison,
    write_comparison_csv, write_run, write_run_csv, BOUND_HEADER,
};
pub use report::{
    comparators, evaluate_bounds, evaluate_surrogates, headline_bound, intervals, BoundReport,
    BoundRow, CheckSummary, Comparator, SurrogateCheck, SurrogateReport, BOUND_TOLERANCE,
    MIX_LOSS_TOLERANCE,
};
pub use run::{run, run_on, Diagnostics, RoundRow, RunRecord};
pub use verify::{
    probe_horizons, structural_suite, verify_run, verify_seeds, RunVerification, StructuralCheck,
    StructuralLimits,
};

/// Environment variable capping the worker pool.
pub const THREADS_VAR: &str = "DRIFTSQUINT_THREADS";

/// Sizes the global rayon pool from `DRIFTSQUINT_THREADS` when it is set to a
/// positive integer. Returns the pool size in effect. Calling it after the
/// pool exists leaves the pool unchanged.
pub fn init_thread_pool() -> usize {
    if let Some(n) = std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    rayon::current_num_threads()
}
