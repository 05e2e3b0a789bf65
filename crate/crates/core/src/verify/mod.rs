//! Monte Carlo estimators, oracle comparisons and reports.

mod checks;
mod report;
mod stats;

pub use checks::{
    check_adjusted_martingale, check_adjusted_mean, check_clock_convergence, check_conditional_laplace, check_cycles,
    check_environment_laplace, check_occupation, check_stable_sampler, check_state_clock_laplace, check_subordinator,
    check_w_composition, check_w_truncation, check_z_martingale, w_composition_sample, ConvergenceReport, DEFAULT_THRESHOLD,
};
pub use report::Report;
pub use stats::{bonferroni_threshold, median, ComparisonResult, StatEstimate, Verdict};
