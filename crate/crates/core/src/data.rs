//! Grouped data, per-level sufficient statistics, and scenario configuration.
//!
//! Under normality every likelihood in this crate depends on the raw data only
//! through `(n_i, ȳ_i, σ̄²_i)`, because for any `μ`
//!
//! ```text
//! Σ_j (y_ij − μ)² = n_i (σ̄²_i + (ȳ_i − μ)²)
//! ```
//!
//! so the fitters consume [`SufficientStats`] and never touch observations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw responses `y_ij` grouped by ordered level `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSample {
    levels: Vec<f64>,
    observations: Vec<Vec<f64>>,
}

impl GroupedSample {
    /// Levels must be strictly increasing and every level needs at least one
    /// finite observation.
    pub fn new(levels: Vec<f64>, observations: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidInput("no levels".into()));
        }
        if levels.len() != observations.len() {
            return Err(Error::InvalidInput(format!(
                "{} level labels but {} observation groups",
                levels.len(),
                observations.len()
            )));
        }
        check_levels(&levels)?;
        for (i, obs) in observations.iter().enumerate() {
            if obs.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "level {} has no observations",
                    levels[i]
                )));
            }
            if obs.iter().any(|y| !y.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "level {} has a non-finite observation",
                    levels[i]
                )));
            }
        }
        Ok(Self {
            levels,
            observations,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.observations
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn total(&self) -> usize {
        self.observations.iter().map(Vec::len).sum()
    }

    /// Responses multiplied by −1; turns a decreasing-mean alternative into an
    /// increasing one.
    pub fn negated(&self) -> Self {
        Self {
            levels: self.levels.clone(),
            observations: self
                .observations
                .iter()
                .map(|obs| obs.iter().map(|y| -y).collect())
                .collect(),
        }
    }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite level label".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "level labels must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Per-level counts, means and variances.
///
/// `var` uses divisor `n_i`; `var_unbiased` uses `n_i − 1` and is `None` for
/// single-observation levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub levels: Vec<f64>,
    pub n: Vec<usize>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub var_unbiased: Vec<Option<f64>>,
    pub total: usize,
}

impl SufficientStats {
    /// Builds statistics from tabulated `(n_i, ȳ_i, σ̄²_i)` with `σ̄²_i` on the
    /// divisor-`n_i` scale.
    pub fn from_summary(
        levels: Vec<f64>,
        n: Vec<usize>,
        mean: Vec<f64>,
        var: Vec<f64>,
    ) -> Result<Self> {
        let k = levels.len();
        if k == 0 {
            return Err(Error::InvalidInput("no levels".into()));
        }
        if n.len() != k || mean.len() != k || var.len() != k {
            return Err(Error::InvalidInput(
                "levels, n, mean and var must have equal length".into(),
            ));
        }
        check_levels(&levels)?;
        for i in 0..k {
            if n[i] == 0 {
                return Err(Error::InvalidInput(format!(
                    "level {} has n = 0",
                    levels[i]
                )));
            }
            if !mean[i].is_finite() || !var[i].is_finite() || var[i] < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "level {} needs a finite mean and a finite non-negative variance",
                    levels[i]
                )));
            }
            if n[i] == 1 && var[i] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "level {} has n = 1 but non-zero variance",
                    levels[i]
                )));
            }
        }
        let var_unbiased = n
            .iter()
            .zip(&var)
            .map(|(&ni, &v)| unbiased(ni, v))
            .collect();
        let total = n.iter().sum();
        Ok(Self {
            levels,
            n,
            mean,
            var,
            var_unbiased,
            total,
        })
    }

    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn min_mean(&self) -> f64 {
        self.mean.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_mean(&self) -> f64 {
        self.mean.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn means_all_equal(&self) -> bool {
        self.mean.windows(2).all(|w| w[0] == w[1])
    }

    /// `s²_i(θ) = Σ_j (y_ij − θ)²/n_i` evaluated from the moments.
    pub fn spread_about(&self, i: usize, theta: f64) -> f64 {
        let d = self.mean[i] - theta;
        self.var[i] + d * d
    }

    /// Sum of squares `Σ_i Σ_j (y_ij − μ_i)²` for a per-level centre vector.
    pub fn sum_of_squares(&self, mu: &[f64]) -> f64 {
        (0..self.k())
            .map(|i| self.n[i] as f64 * self.spread_about(i, mu[i]))
            .sum()
    }

    /// Index of the first level with zero within-level variance, if any.
    pub fn first_degenerate(&self) -> Option<usize> {
        self.var.iter().position(|&v| v <= 0.0)
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.mean.iter_mut().for_each(|m| *m = -*m);
        out
    }

    /// Levels in reverse order. Labels are negated so that they stay strictly
    /// increasing.
    pub fn reversed(&self) -> Self {
        let rev = |v: &Vec<f64>| v.iter().rev().copied().collect::<Vec<_>>();
        Self {
            levels: self.levels.iter().rev().map(|x| -x).collect(),
            n: self.n.iter().rev().copied().collect(),
            mean: rev(&self.mean),
            var: rev(&self.var),
            var_unbiased: self.var_unbiased.iter().rev().copied().collect(),
            total: self.total,
        }
    }
}

fn unbiased(n: usize, var: f64) -> Option<f64> {
    (n >= 2).then(|| var * n as f64 / (n as f64 - 1.0))
}

/// One-pass (Welford) reduction of each level to its moments.
pub fn summarize(sample: &GroupedSample) -> Result<SufficientStats> {
    if sample.k() == 0 {
        return Err(Error::InvalidInput("no levels".into()));
    }
    let k = sample.k();
    let mut n = Vec::with_capacity(k);
    let mut mean = Vec::with_capacity(k);
    let mut var = Vec::with_capacity(k);
    for obs in sample.observations() {
        let mut m = 0.0;
        let mut m2 = 0.0;
        for (j, &y) in obs.iter().enumerate() {
            let delta = y - m;
            m += delta / (j + 1) as f64;
            m2 += delta * (y - m);
        }
        n.push(obs.len());
        mean.push(m);
        var.push((m2 / obs.len() as f64).max(0.0));
    }
    SufficientStats::from_summary(sample.levels().to_vec(), n, mean, var)
}

/// Variance of all observations pooled together (divisor `N`), from the
/// law of total variance.
pub fn pooled_total_variance(stats: &SufficientStats) -> Result<f64> {
    if stats.total < 2 {
        return Err(Error::InvalidInput(
            "pooled variance needs at least two observations".into(),
        ));
    }
    let total = stats.total as f64;
    let grand = (0..stats.k())
        .map(|i| stats.n[i] as f64 * stats.mean[i])
        .sum::<f64>()
        / total;
    let within_and_between = (0..stats.k())
        .map(|i| stats.n[i] as f64 * stats.spread_about(i, grand))
        .sum::<f64>();
    Ok(within_and_between / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `σ²_i = c_i σ²` with known ratios `c_i`.
    KnownRatio,
    UnknownVariances,
    /// Variances unknown but monotone in the level.
    OrderedVariances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    /// Stops when the largest change in the fitted parameters is below `tol`.
    TwoStep,
    /// Alternating iterative method; stops when the log-likelihood changes by
    /// less than `tol`.
    #[default]
    Aim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    #[default]
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Variance ratios `c_i` (known-ratio scenario only). `None` means all 1.
    pub ratios: Option<Vec<f64>>,
    /// Known common variance `σ²` (known-ratio scenario only).
    pub sigma2: Option<f64>,
    pub mean_order: Order,
    /// Order of the variances (ordered-variance scenario only).
    pub variance_order: Order,
    pub tol: f64,
    pub max_iter: usize,
    pub solver: Solver,
}

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 1000;

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            ratios: None,
            sigma2: None,
            mean_order: Order::Increasing,
            variance_order: Order::Decreasing,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            solver: Solver::Aim,
        }
    }

    pub fn known_ratio() -> Self {
        Self::new(Scenario::KnownRatio)
    }

    pub fn unknown_variances() -> Self {
        Self::new(Scenario::UnknownVariances)
    }

    pub fn ordered_variances() -> Self {
        Self::new(Scenario::OrderedVariances)
    }

    pub fn with_ratios(mut self, ratios: Vec<f64>) -> Self {
        self.ratios = Some(ratios);
        self
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = Some(sigma2);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_solver(mut self, solver: Solver) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_mean_order(mut self, order: Order) -> Self {
        self.mean_order = order;
        self
    }

    pub fn with_variance_order(mut self, order: Order) -> Self {
        self.variance_order = order;
        self
    }

    /// Ratios `c_i`, defaulting to all ones.
    pub fn ratios_for(&self, k: usize) -> Result<Vec<f64>> {
        match &self.ratios {
            None => Ok(vec![1.0; k]),
            Some(c) if c.len() != k => Err(Error::InvalidInput(format!(
                "expected {k} variance ratios, got {}",
                c.len()
            ))),
            Some(c) if c.iter().any(|&ci| !(ci > 0.0 && ci.is_finite())) => Err(
                Error::InvalidInput("variance ratios must be positive and finite".into()),
            ),
            Some(c) => Ok(c.clone()),
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        if let Some(s2) = self.sigma2 {
            if !(s2 > 0.0 && s2.is_finite()) {
                return Err(Error::InvalidInput("sigma2 must be positive".into()));
            }
        }
        if self.scenario == Scenario::KnownRatio {
            self.ratios_for(k)?;
        }
        Ok(())
    }
}

/// Maps a configured problem onto the canonical one (increasing means,
/// non-increasing variances) and back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Orientation {
    reverse: bool,
    negate: bool,
}

impl Orientation {
    pub(crate) fn of(cfg: &ScenarioConfig) -> Self {
        let reverse = cfg.scenario == Scenario::OrderedVariances
            && cfg.variance_order == Order::Increasing;
        // Reversing the index also flips the mean order.
        let negate = (cfg.mean_order == Order::Decreasing) != reverse;
        Self { reverse, negate }
    }

    pub(crate) fn is_identity(&self) -> bool {
        !self.reverse && !self.negate
    }

    pub(crate) fn stats(&self, stats: &SufficientStats) -> SufficientStats {
        let s = if self.reverse {
            stats.reversed()
        } else {
            stats.clone()
        };
        if self.negate {
            s.negated()
        } else {
            s
        }
    }

    pub(crate) fn config(&self, cfg: &ScenarioConfig) -> ScenarioConfig {
        let mut c = cfg.clone();
        if self.reverse {
            if let Some(r) = c.ratios.as_mut() {
                r.reverse();
            }
        }
        c.mean_order = Order::Increasing;
        c.variance_order = Order::Decreasing;
        c
    }

    /// Undo the transform on a per-level vector of fitted means.
    pub(crate) fn restore_means(&self, mu: &mut [f64]) {
        if self.negate {
            mu.iter_mut().for_each(|m| *m = -*m);
        }
        if self.reverse {
            mu.reverse();
        }
    }

    pub(crate) fn restore_scalar_mean(&self, mu: f64) -> f64 {
        if self.negate {
            -mu
        } else {
            mu
        }
    }

    pub(crate) fn restore_levels<T>(&self, v: &mut [T]) {
        if self.reverse {
            v.reverse();
        }
    }
}
