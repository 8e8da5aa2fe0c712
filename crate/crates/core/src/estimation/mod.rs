//! Maximum-likelihood fits under the monotone alternative and under the
//! homogeneity null, for each variance scenario.
//!
//! The alternating fitters for unknown and ordered variances are block
//! coordinate ascent on the log-likelihood: an isotonic step in the means for
//! fixed variances, then a closed-form (or antitonic) step in the variances
//! for fixed means. Each full step can only raise the likelihood, which the
//! recorded `trace` makes checkable.

mod alternative;
mod null;

pub use alternative::{fit_alternative, fit_case1, fit_case2, fit_case3};
pub(crate) use alternative::refit_from_null;
pub use null::{fit_null, h0_fit_case2, h0_fit_case3, h0_mean_case1};

use serde::{Deserialize, Serialize};

use crate::data::{Scenario, ScenarioConfig, Solver, SufficientStats};
use crate::error::{Error, Result};

/// Log-likelihood of independent normal levels with constant terms dropped:
/// `Σ_i −n_i/2 ln σ²_i − n_i (σ̄²_i + (ȳ_i − μ_i)²) / (2σ²_i)`.
pub fn log_likelihood(stats: &SufficientStats, mu: &[f64], sigma2: &[f64]) -> f64 {
    (0..stats.k())
        .map(|i| {
            let n = stats.n[i] as f64;
            -0.5 * n * sigma2[i].ln() - n * stats.spread_about(i, mu[i]) / (2.0 * sigma2[i])
        })
        .sum()
}

/// Log-likelihood with the variances profiled out: `−½ Σ n_i ln(σ̄²_i + (ȳ_i − μ_i)²)`.
/// Differs from [`log_likelihood`] at `σ²_i = s²_i(μ_i)` by the constant `−N/2`.
pub fn profile_log_likelihood(stats: &SufficientStats, mu: &[f64]) -> f64 {
    (0..stats.k())
        .map(|i| -0.5 * stats.n[i] as f64 * stats.spread_about(i, mu[i]).ln())
        .sum()
}

/// Common-mean version of [`profile_log_likelihood`].
pub fn null_profile_log_likelihood(stats: &SufficientStats, mu: f64) -> f64 {
    (0..stats.k())
        .map(|i| -0.5 * stats.n[i] as f64 * stats.spread_about(i, mu).ln())
        .sum()
}

/// Fit under the monotone-means alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedFit {
    pub scenario: Scenario,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub log_lik: f64,
    /// Sufficient uniqueness condition for the MLE, where one is known for the
    /// scenario. `Some(false)` means uniqueness is not certified, not that it
    /// fails.
    pub uniqueness_certificate: Option<bool>,
    /// Log-likelihood after each iteration.
    pub trace: Vec<f64>,
    /// Largest absolute change in the means and in the variances over the last
    /// iteration.
    pub final_mean_delta: f64,
    pub final_variance_delta: f64,
}

/// Fit under the common-mean null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullFit {
    pub scenario: Scenario,
    pub mu0: f64,
    pub sigma2: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub log_lik: f64,
    pub trace: Vec<f64>,
}

impl NullFit {
    pub fn mu_vector(&self) -> Vec<f64> {
        vec![self.mu0; self.sigma2.len()]
    }
}

/// Compact boxes for the alternating iterative method: `[−a, a]` for the means
/// and `[nu_lower, nu_upper]` for the precisions `1/σ²_i`.
///
/// The precision box is built from `s²_i(θ) = σ̄²_i + (ȳ_i − θ)²` over
/// `θ ∈ [min ȳ, max ȳ]`: its smallest value over all levels gives the upper
/// precision bound and its largest value the lower bound, so every iterate
/// lies inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AimState {
    pub a: f64,
    pub nu_lower: f64,
    pub nu_upper: f64,
}

impl AimState {
    pub fn new(stats: &SufficientStats) -> Self {
        let (lo, hi) = (stats.min_mean(), stats.max_mean());
        let a = lo.abs().max(hi.abs()) + 1.0;
        let mut smallest = f64::INFINITY;
        let mut largest = 0.0f64;
        for i in 0..stats.k() {
            // s²_i(θ) is minimised at θ = ȳ_i and maximised at an endpoint.
            let m = stats.mean[i];
            let min_spread = stats.spread_about(i, m.clamp(lo, hi));
            let max_spread = stats.spread_about(i, lo).max(stats.spread_about(i, hi));
            smallest = smallest.min(min_spread);
            largest = largest.max(max_spread);
        }
        Self {
            a,
            nu_lower: 1.0 / largest,
            nu_upper: 1.0 / smallest,
        }
    }

    pub(crate) fn clamp_mean(&self, mu: f64) -> f64 {
        mu.clamp(-self.a, self.a)
    }

    pub(crate) fn clamp_precision(&self, nu: f64) -> f64 {
        nu.clamp(self.nu_lower, self.nu_upper)
    }
}

/// Uniqueness condition for the unknown-variance MLE:
/// `σ̄²_i > max{(ȳ_i − min ȳ)², (ȳ_i − max ȳ)²}` for every level.
pub fn check_condition1(stats: &SufficientStats) -> bool {
    let (lo, hi) = (stats.min_mean(), stats.max_mean());
    (0..stats.k()).all(|i| {
        let m = stats.mean[i];
        stats.var[i] > (m - lo).powi(2).max((m - hi).powi(2))
    })
}

/// Uniqueness condition for the ordered-variance MLE:
/// `min σ̄²_i > 2 (max ȳ − min ȳ)`.
pub fn check_condition2(stats: &SufficientStats) -> bool {
    let min_var = stats.var.iter().copied().fold(f64::INFINITY, f64::min);
    min_var > 2.0 * (stats.max_mean() - stats.min_mean())
}

/// Concavity interval of the common-mean profile,
/// `[max_i(ȳ_i − σ̄_i), min_i(ȳ_i + σ̄_i)]`.
pub fn profile_concavity_interval(stats: &SufficientStats) -> (f64, f64) {
    let lower = (0..stats.k())
        .map(|i| stats.mean[i] - stats.var[i].sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = (0..stats.k())
        .map(|i| stats.mean[i] + stats.var[i].sqrt())
        .fold(f64::INFINITY, f64::min);
    (lower, upper)
}

/// True when `[min ȳ, max ȳ]` lies inside [`profile_concavity_interval`], in
/// which case the common-mean profile has a unique maximiser.
pub fn check_profile_uniqueness(stats: &SufficientStats) -> bool {
    let (lower, upper) = profile_concavity_interval(stats);
    lower <= stats.min_mean() && stats.max_mean() <= upper
}

pub(crate) fn require_positive_variances(stats: &SufficientStats) -> Result<()> {
    match stats.first_degenerate() {
        Some(level) => Err(Error::DegenerateVariance { level }),
        None => Ok(()),
    }
}

pub(crate) fn require_scenario(cfg: &ScenarioConfig, expected: Scenario) -> Result<()> {
    if cfg.scenario != expected {
        return Err(Error::InvalidInput(format!(
            "fitter for {expected:?} called with scenario {:?}",
            cfg.scenario
        )));
    }
    Ok(())
}

/// Stopping rule shared by the alternating fitters.
pub(crate) struct StopRule {
    solver: Solver,
    tol: f64,
    check_variances: bool,
}

impl StopRule {
    pub(crate) fn new(cfg: &ScenarioConfig, check_variances: bool) -> Self {
        Self {
            solver: cfg.solver,
            tol: cfg.tol,
            check_variances,
        }
    }

    /// `prev_ll` is `None` on the first iteration, where the likelihood rule
    /// has nothing to compare against.
    pub(crate) fn done(&self, prev_ll: Option<f64>, ll: f64, mean_delta: f64, var_delta: f64) -> bool {
        match self.solver {
            Solver::Aim => prev_ll.is_some_and(|p| (ll - p).abs() <= self.tol),
            Solver::TwoStep => {
                mean_delta <= self.tol && (!self.check_variances || var_delta <= self.tol)
            }
        }
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn gnd() -> SufficientStats {
        SufficientStats::from_summary(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![340, 211, 54, 18],
            vec![0.815, 0.833, 0.870, 0.854],
            vec![0.035, 0.024, 0.017, 0.022],
        )
        .unwrap()
    }

    fn stats(mean: &[f64], var: &[f64]) -> SufficientStats {
        let k = mean.len();
        SufficientStats::from_summary(
            (0..k).map(|i| i as f64).collect(),
            vec![10; k],
            mean.to_vec(),
            var.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn condition1_cases() {
        assert!(check_condition1(&gnd()));
        assert!(check_condition1(&stats(&[0.3], &[0.1])));
        assert!(!check_condition1(&stats(&[0.0, 10.0], &[1.0, 1.0])));
    }

    #[test]
    fn condition2_cases() {
        assert!(!check_condition2(&gnd()));
        assert!(check_condition2(&stats(&[0.5, 0.5, 0.5], &[0.1, 0.2, 0.01])));
        assert!(check_condition2(&stats(&[0.0, 0.1], &[1.0, 1.0])));
    }

    #[test]
    fn profile_uniqueness_cases() {
        let t = gnd();
        let (lo, hi) = profile_concavity_interval(&t);
        assert!((lo - 0.740).abs() < 1e-3 && (hi - 0.988).abs() < 1e-3, "{lo} {hi}");
        assert!(check_profile_uniqueness(&t));
        assert!(check_profile_uniqueness(&stats(&[2.0, 2.0], &[0.5, 0.1])));
        assert!(!check_profile_uniqueness(&stats(&[0.0, 10.0], &[1.0, 1.0])));
    }

    #[test]
    fn aim_boxes_contain_data_range() {
        let t = gnd();
        let s = AimState::new(&t);
        assert!(s.nu_lower <= s.nu_upper);
        assert!(-s.a <= t.min_mean() && t.max_mean() <= s.a);
        assert!((s.nu_upper - 1.0 / 0.017).abs() < 1e-9);
    }

    #[test]
    fn profile_and_full_likelihood_agree() {
        let t = gnd();
        let mu = [0.82, 0.83, 0.86, 0.86];
        let s2: Vec<f64> = (0..4).map(|i| t.spread_about(i, mu[i])).collect();
        let full = log_likelihood(&t, &mu, &s2);
        let prof = profile_log_likelihood(&t, &mu);
        assert!((full - (prof - 0.5 * t.total as f64)).abs() < 1e-9);
    }
}
