use crate::data::{Orientation, Scenario, ScenarioConfig, SufficientStats};
use crate::error::{Error, Result};
use crate::isotonic::{antitonic_fit, isotonic_fit};

use super::{
    check_profile_uniqueness, log_likelihood, max_abs_diff, null_profile_log_likelihood,
    require_positive_variances, require_scenario, NullFit, StopRule,
};

/// Dispatches on `cfg.scenario`.
pub fn fit_null(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<NullFit> {
    match cfg.scenario {
        Scenario::KnownRatio => h0_mean_case1(stats, cfg),
        Scenario::UnknownVariances => h0_fit_case2(stats, cfg),
        Scenario::OrderedVariances => h0_fit_case3(stats, cfg),
    }
}

/// Known ratios: `μ̂_H0 = Σ w_i ȳ_i / Σ w_i` with `w_i = n_i / c_i`; the common
/// variance is the supplied `σ²` or `Σ c_i⁻¹ n_i (σ̄²_i + (ȳ_i − μ̂_H0)²) / N`.
pub fn h0_mean_case1(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<NullFit> {
    require_scenario(cfg, Scenario::KnownRatio)?;
    cfg.validate(stats.k())?;
    let k = stats.k();
    let c = cfg.ratios_for(k)?;
    let w: Vec<f64> = (0..k).map(|i| stats.n[i] as f64 / c[i]).collect();
    let mu0 = if stats.means_all_equal() {
        stats.mean[0]
    } else {
        weighted_mean(&stats.mean, &w)
    };
    let common = match cfg.sigma2 {
        Some(s2) => s2,
        None => {
            let s2 = (0..k)
                .map(|i| w[i] * stats.spread_about(i, mu0))
                .sum::<f64>()
                / stats.total as f64;
            if s2 <= 0.0 {
                return Err(Error::DegenerateVariance { level: 0 });
            }
            s2
        }
    };
    let sigma2: Vec<f64> = c.iter().map(|ci| ci * common).collect();
    let log_lik = log_likelihood(stats, &vec![mu0; k], &sigma2);
    Ok(NullFit {
        scenario: Scenario::KnownRatio,
        mu0,
        sigma2,
        iterations: 0,
        converged: true,
        log_lik,
        trace: vec![log_lik],
    })
}

/// Unknown variances: maximises the common-mean profile
/// `−½ Σ n_i ln(σ̄²_i + (ȳ_i − μ)²)` over `[min ȳ, max ȳ]`, which contains a
/// maximiser. Newton's method on the profile score starts from the
/// Graybill–Deal estimate and is safeguarded by bisection on that bracket.
/// When the profile is not certified unimodal, every sign change of the score
/// on a grid is bisected and the best local maximum kept.
pub fn h0_fit_case2(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<NullFit> {
    require_scenario(cfg, Scenario::UnknownVariances)?;
    cfg.validate(stats.k())?;
    require_positive_variances(stats)?;
    require_replicated(stats)?;
    let k = stats.k();
    let (lo, hi) = (stats.min_mean(), stats.max_mean());

    let (mu0, iterations, converged) = if lo == hi {
        (lo, 0, true)
    } else {
        let start = graybill_deal(stats).clamp(lo, hi);
        let newton = safeguarded_newton(stats, lo, hi, start, cfg.max_iter);
        let unique = check_profile_uniqueness(stats);
        match newton {
            Some((mu, iters)) if unique => (mu, iters, true),
            found => {
                let (scan_mu, scan_iters) = grid_bisection(stats, lo, hi);
                let mut best = scan_mu;
                let mut iters = scan_iters;
                if let Some((mu, newton_iters)) = found {
                    iters += newton_iters;
                    if null_profile_log_likelihood(stats, mu)
                        >= null_profile_log_likelihood(stats, scan_mu)
                    {
                        best = mu;
                    }
                } else {
                    iters += cfg.max_iter;
                }
                (best, iters, true)
            }
        }
    };

    let sigma2: Vec<f64> = (0..k).map(|i| stats.spread_about(i, mu0)).collect();
    let log_lik = log_likelihood(stats, &vec![mu0; k], &sigma2);
    Ok(NullFit {
        scenario: Scenario::UnknownVariances,
        mu0,
        sigma2,
        iterations,
        converged,
        log_lik,
        trace: vec![log_lik],
    })
}

/// Ordered variances: alternates the precision-weighted mean for fixed
/// variances with the antitonic regression of `σ̄²_i + (ȳ_i − μ)²` (weights
/// `n_i`) for fixed mean. Starts from the order-restricted Graybill–Deal
/// estimate whose precision weights are the isotonic regression of `1/s²_i`.
pub fn h0_fit_case3(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<NullFit> {
    require_scenario(cfg, Scenario::OrderedVariances)?;
    cfg.validate(stats.k())?;
    let o = Orientation::of(cfg);
    let canonical = o.stats(stats);
    let mut fit = ordered_null(&canonical, cfg).map_err(|e| match e {
        Error::DegenerateVariance { level } => {
            let mut idx: Vec<usize> = (0..stats.k()).collect();
            o.restore_levels(&mut idx);
            Error::DegenerateVariance { level: idx[level] }
        }
        e => e,
    })?;
    fit.mu0 = o.restore_scalar_mean(fit.mu0);
    o.restore_levels(&mut fit.sigma2);
    Ok(fit)
}

fn ordered_null(stats: &SufficientStats, cfg: &ScenarioConfig) -> Result<NullFit> {
    require_positive_variances(stats)?;
    require_replicated(stats)?;
    let k = stats.k();
    let n: Vec<f64> = stats.n.iter().map(|&ni| ni as f64).collect();
    let variance_step = |mu: f64| -> Result<Vec<f64>> {
        let spread: Vec<f64> = (0..k).map(|i| stats.spread_about(i, mu)).collect();
        Ok(antitonic_fit(&spread, &n)?.fitted)
    };
    let pooled_mean = |sigma2: &[f64]| -> f64 {
        let w: Vec<f64> = (0..k).map(|i| n[i] / sigma2[i]).collect();
        weighted_mean(&stats.mean, &w)
    };
    let (lo, hi) = (stats.min_mean(), stats.max_mean());

    if lo == hi {
        let sigma2 = variance_step(lo)?;
        let log_lik = log_likelihood(stats, &vec![lo; k], &sigma2);
        return Ok(NullFit {
            scenario: Scenario::OrderedVariances,
            mu0: lo,
            sigma2,
            iterations: 0,
            converged: true,
            log_lik,
            trace: vec![log_lik],
        });
    }

    let rule = StopRule::new(cfg, true);
    let mut mu = restricted_graybill_deal(stats)?.clamp(lo, hi);
    let mut sigma2 = variance_step(mu)?;
    let mut ll = log_likelihood(stats, &vec![mu; k], &sigma2);
    let mut trace = vec![ll];
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let next_mu = pooled_mean(&sigma2).clamp(lo, hi);
        let next_sigma2 = variance_step(next_mu)?;
        let next_ll = log_likelihood(stats, &vec![next_mu; k], &next_sigma2);
        let mean_delta = (next_mu - mu).abs();
        let var_delta = max_abs_diff(&sigma2, &next_sigma2);
        mu = next_mu;
        sigma2 = next_sigma2;
        trace.push(next_ll);
        if rule.done(Some(ll), next_ll, mean_delta, var_delta) {
            converged = true;
            ll = next_ll;
            break;
        }
        ll = next_ll;
    }
    Ok(NullFit {
        scenario: Scenario::OrderedVariances,
        mu0: mu,
        sigma2,
        iterations: trace.len() - 1,
        converged,
        log_lik: ll,
        trace,
    })
}

fn require_replicated(stats: &SufficientStats) -> Result<()> {
    if let Some(i) = stats.n.iter().position(|&n| n < 2) {
        return Err(Error::InvalidInput(format!(
            "level index {i} has a single observation; the null fit needs n_i >= 2"
        )));
    }
    Ok(())
}

fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    let (mut sw, mut swv) = (0.0, 0.0);
    for (v, w) in values.iter().zip(weights) {
        sw += w;
        swv += w * v;
    }
    swv / sw
}

fn unbiased_variances(stats: &SufficientStats) -> Result<Vec<f64>> {
    stats
        .var_unbiased
        .iter()
        .enumerate()
        .map(|(i, s2)| {
            s2.filter(|&s| s > 0.0)
                .ok_or(Error::DegenerateVariance { level: i })
        })
        .collect()
}

/// `Σ (n_i ȳ_i / s²_i) / Σ (n_i / s²_i)` with unbiased `s²_i`.
pub(crate) fn graybill_deal(stats: &SufficientStats) -> f64 {
    let s2 = unbiased_variances(stats).expect("checked by caller");
    let w: Vec<f64> = (0..stats.k()).map(|i| stats.n[i] as f64 / s2[i]).collect();
    weighted_mean(&stats.mean, &w)
}

/// Graybill–Deal with precisions `τ̂ = iso(1/s², n)`, i.e. forced to be
/// non-decreasing along the levels.
pub(crate) fn restricted_graybill_deal(stats: &SufficientStats) -> Result<f64> {
    let s2 = unbiased_variances(stats)?;
    let n: Vec<f64> = stats.n.iter().map(|&ni| ni as f64).collect();
    let t: Vec<f64> = s2.iter().map(|s| 1.0 / s).collect();
    let tau = isotonic_fit(&t, &n)?.fitted;
    let w: Vec<f64> = (0..stats.k()).map(|i| n[i] * tau[i]).collect();
    Ok(weighted_mean(&stats.mean, &w))
}

/// Derivative of the common-mean profile, `Σ n_i d_i / (σ̄²_i + d_i²)` with
/// `d_i = ȳ_i − μ`.
fn profile_score(stats: &SufficientStats, mu: f64) -> f64 {
    (0..stats.k())
        .map(|i| {
            let d = stats.mean[i] - mu;
            stats.n[i] as f64 * d / (stats.var[i] + d * d)
        })
        .sum()
}

fn profile_curvature(stats: &SufficientStats, mu: f64) -> f64 {
    (0..stats.k())
        .map(|i| {
            let d = stats.mean[i] - mu;
            let s = stats.var[i] + d * d;
            stats.n[i] as f64 * (d * d - stats.var[i]) / (s * s)
        })
        .sum()
}

fn step_tolerance(lo: f64, hi: f64, x: f64) -> f64 {
    (1e-14 * (hi - lo)).max(4.0 * f64::EPSILON * x.abs())
}

/// Newton on the score inside a shrinking bracket `[a, b]` with
/// `score(a) ≥ 0 ≥ score(b)`; bisects whenever the Newton step is not an
/// ascent step or leaves the bracket. Returns `None` on hitting `max_iter`.
fn safeguarded_newton(
    stats: &SufficientStats,
    lo: f64,
    hi: f64,
    start: f64,
    max_iter: usize,
) -> Option<(f64, usize)> {
    let (mut a, mut b) = (lo, hi);
    let mut x = start;
    for it in 1..=max_iter {
        let g = profile_score(stats, x);
        if g == 0.0 {
            return Some((x, it));
        }
        if g > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let h = profile_curvature(stats, x);
        let newton = x - g / h;
        let next = if h < 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= step_tolerance(lo, hi, x) {
            return Some((next, it));
        }
        x = next;
    }
    None
}

/// Bisection of `score` on `[a, b]` given `score(a) > 0 > score(b)`.
fn bisect(stats: &SufficientStats, mut a: f64, mut b: f64, lo: f64, hi: f64) -> (f64, usize) {
    let mut iters = 0;
    while b - a > step_tolerance(lo, hi, a) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        iters += 1;
        if profile_score(stats, m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    (0.5 * (a + b), iters)
}

const SCAN_POINTS_PER_LEVEL: usize = 64;

/// Brackets every local maximum of the profile on a grid that includes each
/// level mean, bisects each, and returns the best.
fn grid_bisection(stats: &SufficientStats, lo: f64, hi: f64) -> (f64, usize) {
    let points = SCAN_POINTS_PER_LEVEL * stats.k();
    let mut grid: Vec<f64> = (0..=points)
        .map(|j| lo + (hi - lo) * j as f64 / points as f64)
        .chain(stats.mean.iter().copied())
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut best = (lo, f64::NEG_INFINITY);
    let mut iters = 0;
    let mut consider = |mu: f64| {
        let v = null_profile_log_likelihood(stats, mu);
        if v > best.1 {
            best = (mu, v);
        }
    };
    let scores: Vec<f64> = grid.iter().map(|&x| profile_score(stats, x)).collect();
    for j in 0..grid.len() {
        if scores[j] == 0.0 {
            consider(grid[j]);
        }
        if j + 1 < grid.len() && scores[j] > 0.0 && scores[j + 1] < 0.0 {
            let (mu, it) = bisect(stats, grid[j], grid[j + 1], lo, hi);
            iters += it;
            consider(mu);
        }
    }
    (best.0, iters)
}
