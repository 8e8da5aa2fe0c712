use crate::data::{Orientation, Scenario, ScenarioConfig, SufficientStats};
use crate::error::{Error, Result};
use crate::isotonic::{antitonic_fit, is_nondecreasing, is_nonincreasing, isotonic_fit};

use super::{
    check_condition1, check_condition2, log_likelihood, max_abs_diff, require_positive_variances,
    require_scenario, AimState, NullFit, RestrictedFit, StopRule,
};

/// Dispatches on `cfg.scenario`.
pub fn fit_alternative(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<RestrictedFit> {
    match cfg.scenario {
        Scenario::KnownRatio => fit_case1(stats, cfg),
        Scenario::UnknownVariances => fit_case2(stats, cfg),
        Scenario::OrderedVariances => fit_case3(stats, cfg),
    }
}

/// Known variance ratios `σ²_i = c_i σ²`: the means are the isotonic regression
/// of `ȳ` with weights `n_i / c_i`. The common `σ²` is the supplied value, or
/// its MLE `Σ c_i⁻¹ n_i (σ̄²_i + (ȳ_i − μ̂_i)²) / N`.
pub fn fit_case1(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<RestrictedFit> {
    require_scenario(cfg, Scenario::KnownRatio)?;
    cfg.validate(stats.k())?;
    oriented(stats, cfg, |s, c| known_ratio(s, c))
}

/// Unknown, unrestricted variances.
pub fn fit_case2(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<RestrictedFit> {
    require_scenario(cfg, Scenario::UnknownVariances)?;
    cfg.validate(stats.k())?;
    oriented(stats, cfg, |s, c| alternating(s, c, false, None))
}

/// Unknown variances restricted to be monotone (non-increasing by default).
pub fn fit_case3(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<RestrictedFit> {
    require_scenario(cfg, Scenario::OrderedVariances)?;
    cfg.validate(stats.k())?;
    oriented(stats, cfg, |s, c| alternating(s, c, true, None))
}

/// Alternative fit started from the null fit's variances. The null solution is
/// feasible under the alternative, so ascent from it cannot end below the null
/// likelihood.
pub(crate) fn refit_from_null(
    stats: &SufficientStats,
    cfg: &ScenarioConfig,
    null: &NullFit,
) -> Result<RestrictedFit> {
    let o = Orientation::of(cfg);
    let mut start = null.sigma2.clone();
    // Reversal is its own inverse.
    o.restore_levels(&mut start);
    let ordered = match cfg.scenario {
        Scenario::KnownRatio => return fit_case1(stats, cfg),
        Scenario::UnknownVariances => false,
        Scenario::OrderedVariances => true,
    };
    oriented(stats, cfg, |s, c| alternating(s, c, ordered, Some(&start)))
}

fn oriented(
    stats: &SufficientStats,
    cfg: &ScenarioConfig,
    fit: impl FnOnce(&SufficientStats, &ScenarioConfig) -> Result<RestrictedFit>,
) -> Result<RestrictedFit> {
    let o = Orientation::of(cfg);
    if o.is_identity() {
        return fit(stats, cfg);
    }
    let mut out = fit(&o.stats(stats), &o.config(cfg)).map_err(|e| match e {
        Error::DegenerateVariance { level } if cfg.scenario == Scenario::OrderedVariances => {
            let mut idx: Vec<usize> = (0..stats.k()).collect();
            o.restore_levels(&mut idx);
            Error::DegenerateVariance { level: idx[level] }
        }
        e => e,
    })?;
    o.restore_means(&mut out.mu);
    o.restore_levels(&mut out.sigma2);
    Ok(out)
}

fn known_ratio(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<RestrictedFit> {
    let k = stats.k();
    let c = cfg.ratios_for(k)?;
    let w: Vec<f64> = (0..k).map(|i| stats.n[i] as f64 / c[i]).collect();
    let mu = isotonic_fit(&stats.mean, &w)?.fitted;
    let common = match cfg.sigma2 {
        Some(s2) => s2,
        None => {
            let s2 = (0..k)
                .map(|i| stats.n[i] as f64 * stats.spread_about(i, mu[i]) / c[i])
                .sum::<f64>()
                / stats.total as f64;
            if s2 <= 0.0 {
                return Err(Error::DegenerateVariance { level: 0 });
            }
            s2
        }
    };
    let sigma2: Vec<f64> = c.iter().map(|ci| ci * common).collect();
    let log_lik = log_likelihood(stats, &mu, &sigma2);
    let final_mean_delta = max_abs_diff(&mu, &stats.mean);
    Ok(RestrictedFit {
        scenario: Scenario::KnownRatio,
        iterations: usize::from(!stats.means_all_equal()),
        converged: true,
        log_lik,
        uniqueness_certificate: None,
        trace: vec![log_lik],
        final_mean_delta,
        final_variance_delta: 0.0,
        mu,
        sigma2,
    })
}

/// Block coordinate ascent: isotonic means for fixed precisions, then the
/// variances that maximise the likelihood for fixed means (`s²_i(μ_i)`, or
/// their antitonic regression with weights `n_i` when `ordered`).
fn alternating(
    stats: &SufficientStats,
    cfg: &ScenarioConfig,
    ordered: bool,
    start_sigma2: Option<&[f64]>,
) -> Result<RestrictedFit> {
    require_positive_variances(stats)?;
    let k = stats.k();
    let n: Vec<f64> = stats.n.iter().map(|&ni| ni as f64).collect();
    let scenario = if ordered {
        Scenario::OrderedVariances
    } else {
        Scenario::UnknownVariances
    };
    let certificate = Some(if ordered {
        check_condition2(stats)
    } else {
        check_condition1(stats)
    });
    let variance_step = |mu: &[f64]| -> Result<Vec<f64>> {
        let spread: Vec<f64> = (0..k).map(|i| stats.spread_about(i, mu[i])).collect();
        if ordered {
            Ok(antitonic_fit(&spread, &n)?.fitted)
        } else {
            Ok(spread)
        }
    };
    let closed_form = |mu: Vec<f64>, iterations: usize| -> Result<RestrictedFit> {
        let sigma2 = variance_step(&mu)?;
        let log_lik = log_likelihood(stats, &mu, &sigma2);
        Ok(RestrictedFit {
            scenario,
            final_mean_delta: 0.0,
            final_variance_delta: max_abs_diff(&sigma2, &stats.var),
            mu,
            sigma2,
            iterations,
            converged: true,
            log_lik,
            uniqueness_certificate: certificate,
            trace: vec![log_lik],
        })
    };

    if start_sigma2.is_none() {
        if stats.means_all_equal() {
            return closed_form(stats.mean.clone(), 0);
        }
        if is_nondecreasing(&stats.mean) && (!ordered || is_nonincreasing(&stats.var)) {
            return closed_form(stats.mean.clone(), 1);
        }
    }

    let aim = AimState::new(stats);
    let rule = StopRule::new(cfg, ordered);
    let mut sigma2: Vec<f64> = start_sigma2.map_or_else(|| stats.var.clone(), <[f64]>::to_vec);
    let mut mu = stats.mean.clone();
    let mut prev_ll = None;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut mean_delta = f64::INFINITY;
    let mut var_delta = f64::INFINITY;

    for _ in 0..cfg.max_iter {
        let weights: Vec<f64> = (0..k)
            .map(|i| n[i] * aim.clamp_precision(1.0 / sigma2[i]))
            .collect();
        let next_mu: Vec<f64> = isotonic_fit(&stats.mean, &weights)?
            .fitted
            .into_iter()
            .map(|m| aim.clamp_mean(m))
            .collect();
        let mut next_sigma2 = variance_step(&next_mu)?;
        for s in &mut next_sigma2 {
            let nu = 1.0 / *s;
            let clamped = aim.clamp_precision(nu);
            if clamped != nu {
                *s = 1.0 / clamped;
            }
        }
        let ll = log_likelihood(stats, &next_mu, &next_sigma2);
        mean_delta = max_abs_diff(&mu, &next_mu);
        var_delta = max_abs_diff(&sigma2, &next_sigma2);
        mu = next_mu;
        sigma2 = next_sigma2;
        trace.push(ll);
        if rule.done(prev_ll, ll, mean_delta, var_delta) {
            converged = true;
            break;
        }
        prev_ll = Some(ll);
    }

    let log_lik = *trace.last().expect("max_iter >= 1");
    Ok(RestrictedFit {
        scenario,
        iterations: trace.len(),
        converged,
        log_lik,
        uniqueness_certificate: certificate,
        trace,
        final_mean_delta: mean_delta,
        final_variance_delta: var_delta,
        mu,
        sigma2,
    })
}
