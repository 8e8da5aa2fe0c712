//! Likelihood-ratio statistics for `H0: μ_1 = … = μ_k` against monotone means.
//!
//! | kind | scenario | scale |
//! |------|----------|-------|
//! | [`TestKind::ChiBarSq`] | known common variance | `Σ n_i (μ̂_i − μ̂_0)² / σ²` |
//! | [`TestKind::EBarSq`] | known ratios, unknown `σ²` | `1 − Λ^{2/N}`, in `[0, 1]` |
//! | [`TestKind::Neg2LogLambdaTilde`] | unknown variances | `−2 log Λ` |
//! | [`TestKind::Neg2LogLambdaI`] | ordered variances | `−2 log Λ` |
//!
//! When the alternative fit pools all levels into one block it coincides with
//! the null fit and the statistic is exactly zero.

use serde::{Deserialize, Serialize};

use crate::data::{Scenario, ScenarioConfig, SufficientStats};
use crate::error::{Error, Result};
use crate::estimation::{
    fit_case1, fit_case2, fit_case3, h0_fit_case2, h0_fit_case3, h0_mean_case1, refit_from_null,
    NullFit, RestrictedFit,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    ChiBarSq,
    EBarSq,
    Neg2LogLambdaTilde,
    Neg2LogLambdaI,
}

impl TestKind {
    pub fn scenario(self) -> Scenario {
        match self {
            TestKind::ChiBarSq | TestKind::EBarSq => Scenario::KnownRatio,
            TestKind::Neg2LogLambdaTilde => Scenario::UnknownVariances,
            TestKind::Neg2LogLambdaI => Scenario::OrderedVariances,
        }
    }

    /// Human-readable label for reports.
    pub fn label(self) -> &'static str {
        match self {
            TestKind::ChiBarSq => "chi-bar-square",
            TestKind::EBarSq => "E-bar-square",
            TestKind::Neg2LogLambdaTilde => "-2 log Lambda (unknown variances)",
            TestKind::Neg2LogLambdaI => "-2 log Lambda (ordered variances)",
        }
    }

    pub fn scale(self) -> &'static str {
        match self {
            TestKind::ChiBarSq => "chi-bar-square",
            TestKind::EBarSq => "1 - Lambda^(2/N)",
            TestKind::Neg2LogLambdaTilde | TestKind::Neg2LogLambdaI => "-2 log Lambda",
        }
    }

    /// Statistic paired with a scenario: known ratio with a known `σ²` gives
    /// χ̄², known ratio otherwise Ē², and the LRT for the other two.
    pub fn auto(cfg: &ScenarioConfig) -> Self {
        match cfg.scenario {
            Scenario::KnownRatio if cfg.sigma2.is_some() => TestKind::ChiBarSq,
            Scenario::KnownRatio => TestKind::EBarSq,
            Scenario::UnknownVariances => TestKind::Neg2LogLambdaTilde,
            Scenario::OrderedVariances => TestKind::Neg2LogLambdaI,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub kind: TestKind,
    pub value: f64,
    pub null_fit: NullFit,
    pub alt_fit: RestrictedFit,
}

impl TestStatistic {
    pub fn converged(&self) -> bool {
        self.null_fit.converged && self.alt_fit.converged
    }
}

/// χ̄² with unit ratios and known common variance `sigma2`.
pub fn chi_bar_sq(stats: &SufficientStats, sigma2: f64) -> Result<TestStatistic> {
    chi_bar_sq_with(stats, &ScenarioConfig::known_ratio().with_sigma2(sigma2))
}

/// Ē² for known ratios `c` and unknown common variance.
pub fn e_bar_sq(stats: &SufficientStats, c: &[f64]) -> Result<TestStatistic> {
    e_bar_sq_with(stats, &ScenarioConfig::known_ratio().with_ratios(c.to_vec()))
}

/// `−2 log Λ̃ = Σ n_i ln(σ̂²_{i,H0} / σ̂²_{i,H1})` for unknown variances.
pub fn lrt_unknown(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<TestStatistic> {
    if cfg.scenario != Scenario::UnknownVariances {
        return Err(Error::InvalidInput("lrt_unknown needs the unknown-variance scenario".into()));
    }
    let null_fit = h0_fit_case2(stats, cfg)?;
    let alt_fit = at_least_null(stats, cfg, fit_case2(stats, cfg)?, &null_fit)?;
    let mut value = 0.0;
    for i in 0..stats.k() {
        let (s0, s1) = (null_fit.sigma2[i], alt_fit.sigma2[i]);
        if !(s0 > 0.0 && s1 > 0.0) {
            return Err(Error::DegenerateVariance { level: i });
        }
        value += stats.n[i] as f64 * (s0 / s1).ln();
    }
    Ok(finish(TestKind::Neg2LogLambdaTilde, value, null_fit, alt_fit))
}

/// `−2 log Λᴵ = 2 [ℓ(H1 fit) − ℓ(H0 fit)]` for ordered variances, from the
/// full log-likelihood (the quadratic terms do not cancel here).
pub fn lrt_ordered(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<TestStatistic> {
    if cfg.scenario != Scenario::OrderedVariances {
        return Err(Error::InvalidInput("lrt_ordered needs the ordered-variance scenario".into()));
    }
    let null_fit = h0_fit_case3(stats, cfg)?;
    let alt_fit = at_least_null(stats, cfg, fit_case3(stats, cfg)?, &null_fit)?;
    if let Some(i) = null_fit
        .sigma2
        .iter()
        .chain(&alt_fit.sigma2)
        .position(|&s| !(s > 0.0))
    {
        return Err(Error::DegenerateVariance { level: i % stats.k() });
    }
    let value = 2.0 * (alt_fit.log_lik - null_fit.log_lik);
    Ok(finish(TestKind::Neg2LogLambdaI, value, null_fit, alt_fit))
}

fn chi_bar_sq_with(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<TestStatistic> {
    let sigma2 = match cfg.sigma2 {
        Some(s) if s > 0.0 && s.is_finite() => s,
        _ => return Err(Error::InvalidInput("chi-bar-square needs a positive known sigma2".into())),
    };
    let mut cfg = cfg.clone();
    cfg.scenario = Scenario::KnownRatio;
    cfg.ratios = None;
    let null_fit = h0_mean_case1(stats, &cfg)?;
    let alt_fit = fit_case1(stats, &cfg)?;
    let value = (0..stats.k())
        .map(|i| stats.n[i] as f64 * (alt_fit.mu[i] - null_fit.mu0).powi(2))
        .sum::<f64>()
        / sigma2;
    Ok(finish(TestKind::ChiBarSq, value, null_fit, alt_fit))
}

fn e_bar_sq_with(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<TestStatistic> {
    let mut cfg = cfg.clone();
    cfg.scenario = Scenario::KnownRatio;
    cfg.sigma2 = None;
    let c = cfg.ratios_for(stats.k())?;
    let null_fit = h0_mean_case1(stats, &cfg)?;
    let alt_fit = fit_case1(stats, &cfg)?;
    let (mut between, mut total) = (0.0, 0.0);
    for i in 0..stats.k() {
        let n = stats.n[i] as f64;
        between += n * (alt_fit.mu[i] - null_fit.mu0).powi(2) / c[i];
        total += n * stats.spread_about(i, null_fit.mu0) / c[i];
    }
    if total <= 0.0 {
        return Err(Error::DegenerateVariance { level: 0 });
    }
    Ok(finish(TestKind::EBarSq, between / total, null_fit, alt_fit))
}

/// The null fit is feasible under the alternative, so an alternative fit with
/// a lower likelihood stopped early; restart it from the null variances.
fn at_least_null(
    stats: &SufficientStats,
    cfg: &ScenarioConfig,
    alt: RestrictedFit,
    null: &NullFit,
) -> Result<RestrictedFit> {
    if alt.log_lik >= null.log_lik {
        return Ok(alt);
    }
    let warm = refit_from_null(stats, cfg, null)?;
    Ok(if warm.log_lik > alt.log_lik { warm } else { alt })
}

fn finish(kind: TestKind, value: f64, null_fit: NullFit, alt_fit: RestrictedFit) -> TestStatistic {
    let pooled = alt_fit.mu.windows(2).all(|w| w[0] == w[1]);
    let value = if pooled { 0.0 } else { value.max(0.0) };
    let value = if kind == TestKind::EBarSq { value.min(1.0) } else { value };
    TestStatistic {
        kind,
        value,
        null_fit,
        alt_fit,
    }
}

/// A statistic together with the configuration needed to recompute it on
/// resampled data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSetup {
    pub kind: TestKind,
    pub config: ScenarioConfig,
}

impl TestSetup {
    pub fn new(kind: TestKind, config: ScenarioConfig) -> Result<Self> {
        if kind.scenario() != config.scenario {
            return Err(Error::InvalidInput(format!(
                "statistic {} does not apply to scenario {:?}",
                kind.label(),
                config.scenario
            )));
        }
        if kind == TestKind::ChiBarSq && config.sigma2.is_none() {
            return Err(Error::InvalidInput("chi-bar-square needs a known sigma2".into()));
        }
        Ok(Self { kind, config })
    }

    pub fn auto(config: ScenarioConfig) -> Self {
        Self {
            kind: TestKind::auto(&config),
            config,
        }
    }

    pub fn evaluate(&self, stats: &SufficientStats) -> Result<TestStatistic> {
        self.config.validate(stats.k())?;
        match self.kind {
            TestKind::ChiBarSq => chi_bar_sq_with(stats, &self.config),
            TestKind::EBarSq => e_bar_sq_with(stats, &self.config),
            TestKind::Neg2LogLambdaTilde => lrt_unknown(stats, &self.config),
            TestKind::Neg2LogLambdaI => lrt_ordered(stats, &self.config),
        }
    }
}
