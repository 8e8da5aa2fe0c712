//! Order-restricted maximum-likelihood estimation and likelihood-ratio tests
//! for a monotone trend in the means of normal grouped data.
//!
//! Data come in at one of two levels: raw observations per dose level
//! ([`GroupedSample`]) or per-level sufficient statistics
//! ([`SufficientStats`]). Everything downstream of the raw data works on the
//! sufficient statistics.
//!
//! ```
//! use monotone_lrt::{fit_case2, lrt_unknown, ScenarioConfig, SufficientStats};
//!
//! let stats = SufficientStats::from_summary(
//!     vec![0.0, 1.0, 2.0, 3.0],
//!     vec![340, 211, 54, 18],
//!     vec![0.815, 0.833, 0.870, 0.854],
//!     vec![0.035, 0.024, 0.017, 0.022],
//! )?;
//! let cfg = ScenarioConfig::unknown_variances();
//! let fit = fit_case2(&stats, &cfg)?;
//! assert!(fit.mu.windows(2).all(|w| w[0] <= w[1]));
//! let stat = lrt_unknown(&stats, &cfg)?;
//! assert!(stat.value > 7.0);
//! # Ok::<(), monotone_lrt::Error>(())
//! ```

pub mod bootstrap;
pub mod cli;
pub mod data;
pub mod error;
pub mod estimation;
pub mod isotonic;
pub mod lrt;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
pub(crate) mod oracle;

pub use bootstrap::{
    nonparametric_bootstrap, parametric_bootstrap, BootstrapMode, BootstrapPlan, BootstrapResult,
    Generation,
};
pub use data::{
    pooled_total_variance, summarize, GroupedSample, Order, Scenario, ScenarioConfig, Solver,
    SufficientStats,
};
pub use error::{Error, Result};
pub use estimation::{
    check_condition1, check_condition2, fit_alternative, fit_case1, fit_case2, fit_case3, fit_null,
    h0_fit_case2, h0_fit_case3, h0_mean_case1, log_likelihood, NullFit, RestrictedFit,
};
pub use isotonic::{antitonic_regression, isotonic_regression, Block, BlockSolution, WeightedVector};
pub use lrt::{chi_bar_sq, e_bar_sq, lrt_ordered, lrt_unknown, TestKind, TestSetup, TestStatistic};
