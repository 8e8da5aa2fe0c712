//! Bootstrap approximation of the null distribution of a [`TestStatistic`].
//!
//! Each replicate draws data under the fitted null, refits both hypotheses and
//! recomputes the statistic; the p-value is the fraction of replicates whose
//! statistic strictly exceeds the observed one. Replicate `r` uses its own
//! ChaCha stream `(seed, r)`, so results do not depend on the worker count or
//! on scheduling.
//!
//! [`TestStatistic`]: crate::lrt::TestStatistic

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{GroupedSample, SufficientStats};
use crate::error::{Error, Result};
use crate::estimation::NullFit;
use crate::lrt::TestSetup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BootstrapMode {
    Parametric,
    Nonparametric,
}

/// How parametric replicates are drawn.
///
/// `RawSamples` draws `n_i` normal responses per level. `SufficientOnly` draws
/// the sufficient statistics directly, `ȳ* ~ N(μ̂_0, σ̂²_i / n_i)` and
/// `n_i σ̄²* ~ σ̂²_i χ²(n_i − 1)` independently, which has the same
/// distribution for normal data at O(k) cost per replicate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generation {
    RawSamples,
    #[default]
    SufficientOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    pub mode: BootstrapMode,
    pub replicates: usize,
    pub seed: u64,
    pub setup: TestSetup,
    /// Ignored by the non-parametric bootstrap.
    pub generation: Generation,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub keep_replicates: bool,
}

impl BootstrapPlan {
    pub fn new(mode: BootstrapMode, setup: TestSetup, replicates: usize, seed: u64) -> Self {
        Self {
            mode,
            replicates,
            seed,
            setup,
            generation: Generation::default(),
            workers: None,
            keep_replicates: false,
        }
    }

    pub fn with_generation(mut self, generation: Generation) -> Self {
        self.generation = generation;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn keeping_replicates(mut self) -> Self {
        self.keep_replicates = true;
        self
    }

    fn validate(&self, mode: BootstrapMode, null_fit: &NullFit) -> Result<()> {
        if self.mode != mode {
            return Err(Error::InvalidInput(format!("plan is for {:?} bootstrap", self.mode)));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidInput("at least one replicate is required".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidInput("worker count must be positive".into()));
        }
        if null_fit.scenario != self.setup.config.scenario {
            return Err(Error::InvalidInput(format!(
                "null fit is for {:?} but the statistic needs {:?}",
                null_fit.scenario, self.setup.config.scenario
            )));
        }
        if null_fit.sigma2.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput("null fit has a non-positive variance".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mode: BootstrapMode,
    /// `#(T* > T_obs) / M_eff` over the replicates that fitted successfully.
    pub p_value: f64,
    /// `(#(T* > T_obs) + 1) / (M_eff + 1)`, never zero.
    pub p_value_plus_one: f64,
    pub observed: f64,
    pub replicates: usize,
    pub exceedances: usize,
    /// Replicates where a fitter errored or did not converge. They are left
    /// out of both numerator and denominator.
    pub failures: usize,
    pub seed: u64,
    pub replicate_values: Option<Vec<f64>>,
    pub warning: Option<String>,
}

/// Parametric bootstrap: replicate data are normal with the null mean and the
/// per-level null variances of `null_fit`, with sizes `n`.
pub fn parametric_bootstrap(
    null_fit: &NullFit,
    n: &[usize],
    observed: f64,
    plan: &BootstrapPlan,
) -> Result<BootstrapResult> {
    plan.validate(BootstrapMode::Parametric, null_fit)?;
    if n.len() != null_fit.sigma2.len() || n.contains(&0) {
        return Err(Error::InvalidInput("level sizes do not match the null fit".into()));
    }
    let levels: Vec<f64> = (0..n.len()).map(|i| i as f64).collect();
    let mu0 = null_fit.mu0;
    let sd: Vec<f64> = null_fit.sigma2.iter().map(|s| s.sqrt()).collect();
    let chi: Vec<Option<ChiSquared<f64>>> = n
        .iter()
        .map(|&ni| (ni > 1).then(|| ChiSquared::new((ni - 1) as f64).expect("positive dof")))
        .collect();

    let draw = |rng: &mut ChaCha8Rng| -> Result<SufficientStats> {
        let k = n.len();
        let (mut mean, mut var) = (Vec::with_capacity(k), Vec::with_capacity(k));
        match plan.generation {
            Generation::SufficientOnly => {
                for i in 0..k {
                    let ni = n[i] as f64;
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    mean.push(mu0 + sd[i] / ni.sqrt() * z);
                    let w = chi[i].map_or(0.0, |c| c.sample(rng));
                    var.push(null_fit.sigma2[i] * w / ni);
                }
            }
            Generation::RawSamples => {
                for i in 0..k {
                    let normal = Normal::new(mu0, sd[i]).expect("finite sd");
                    let obs: Vec<f64> = (0..n[i]).map(|_| normal.sample(rng)).collect();
                    let (m, v) = moments(&obs);
                    mean.push(m);
                    var.push(v);
                }
            }
        }
        SufficientStats::from_summary(levels.clone(), n.to_vec(), mean, var)
    };
    run(plan, observed, draw)
}

/// Non-parametric bootstrap: resamples the pooled standardized residuals of
/// `sample` and maps them back through the null fit, `y* = z* σ̂_i + μ̂_0`.
pub fn nonparametric_bootstrap(
    sample: &GroupedSample,
    null_fit: &NullFit,
    observed: f64,
    plan: &BootstrapPlan,
) -> Result<BootstrapResult> {
    plan.validate(BootstrapMode::Nonparametric, null_fit)?;
    if sample.k() != null_fit.sigma2.len() {
        return Err(Error::InvalidInput("sample and null fit have different level counts".into()));
    }
    let pool = standardized_residuals(sample)?;
    let n: Vec<usize> = sample.observations().iter().map(Vec::len).collect();
    let levels = sample.levels().to_vec();
    let sd: Vec<f64> = null_fit.sigma2.iter().map(|s| s.sqrt()).collect();
    let mu0 = null_fit.mu0;

    let draw = |rng: &mut ChaCha8Rng| -> Result<SufficientStats> {
        let k = n.len();
        let (mut mean, mut var) = (Vec::with_capacity(k), Vec::with_capacity(k));
        let mut obs = Vec::new();
        for i in 0..k {
            obs.clear();
            obs.extend((0..n[i]).map(|_| pool[rng.random_range(0..pool.len())] * sd[i] + mu0));
            let (m, v) = moments(&obs);
            mean.push(m);
            var.push(v);
        }
        SufficientStats::from_summary(levels.clone(), n.clone(), mean, var)
    };
    run(plan, observed, draw)
}

/// Pooled residuals `z_ij = (y_ij − ȳ_i) / s_i`, with `s²_i` the unbiased
/// level variance. Needs two or more observations and some spread per level.
pub fn standardized_residuals(sample: &GroupedSample) -> Result<Vec<f64>> {
    let mut pool = Vec::with_capacity(sample.total());
    for (i, obs) in sample.observations().iter().enumerate() {
        if obs.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "level {} needs at least two observations for residual resampling",
                sample.levels()[i]
            )));
        }
        let (mean, var) = moments(obs);
        let s = (var * obs.len() as f64 / (obs.len() - 1) as f64).sqrt();
        if !(s > 0.0) {
            return Err(Error::DegenerateVariance { level: i });
        }
        pool.extend(obs.iter().map(|y| (y - mean) / s));
    }
    Ok(pool)
}

/// Writes one replicate value per line.
pub fn write_replicate_values<W: Write>(mut out: W, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

fn run<F>(plan: &BootstrapPlan, observed: f64, draw: F) -> Result<BootstrapResult>
where
    F: Fn(&mut ChaCha8Rng) -> Result<SufficientStats> + Sync,
{
    let replicate = |r: usize| -> Option<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        rng.set_stream(r as u64);
        let stats = draw(&mut rng).ok()?;
        let t = plan.setup.evaluate(&stats).ok()?;
        (t.converged() && t.value.is_finite()).then_some(t.value)
    };
    let collect = || -> Vec<Option<f64>> { (0..plan.replicates).into_par_iter().map(replicate).collect() };
    let values = match plan.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?
            .install(collect),
        None => collect(),
    };

    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    let failures = plan.replicates - ok.len();
    if ok.is_empty() {
        return Err(Error::NonConvergence(format!(
            "all {} bootstrap replicates failed",
            plan.replicates
        )));
    }
    let exceedances = ok.iter().filter(|&&t| t > observed).count();
    let m = ok.len() as f64;
    let warning = (failures * 100 > plan.replicates).then(|| {
        format!(
            "{failures} of {} bootstrap replicates failed and were excluded",
            plan.replicates
        )
    });
    Ok(BootstrapResult {
        mode: plan.mode,
        p_value: exceedances as f64 / m,
        p_value_plus_one: (exceedances + 1) as f64 / (m + 1.0),
        observed,
        replicates: plan.replicates,
        exceedances,
        failures,
        seed: plan.seed,
        replicate_values: plan.keep_replicates.then_some(ok),
        warning,
    })
}

/// Mean and divisor-`n` variance.
fn moments(obs: &[f64]) -> (f64, f64) {
    let n = obs.len() as f64;
    let mean = obs.iter().sum::<f64>() / n;
    let var = obs.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}
