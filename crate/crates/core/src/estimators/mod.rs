//! Monte Carlo ensemble engine and oracle comparisons.

pub mod ensemble;
pub mod report;
pub mod stats;
pub mod suites;

pub use ensemble::{
    path_rng, run_ensemble, EnsembleSummary, Estimate, Grid, Model, Observable, Probe,
};
pub use report::{
    read_reports_csv, write_reports_csv, Check, ComparisonReport, ReportRow, DEFAULT_THRESHOLD,
};
pub use stats::{CoMoments, Moments};
pub use suites::{
    convergence_table, estimate_msd, estimate_tangent_correlation, frc_oracle_suite,
    hard_rod_diagnostics, kp_oracle_suite, random_coil_diagnostics, with_rerun, RunOptions,
    SuiteOutcome,
};
