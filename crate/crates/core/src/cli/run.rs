use std::path::PathBuf;

use clap::{Args, ValueEnum};

use super::io::InputData;
use super::report::{Conditions, Estimates, InputInfo, PValues, Report, Settings, StatisticBlock};
use crate::bootstrap::{
    nonparametric_bootstrap, parametric_bootstrap, BootstrapMode, BootstrapPlan, Generation,
};
use crate::data::{pooled_total_variance, Order, Scenario, ScenarioConfig, Solver, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::estimation::{
    check_condition1, check_condition2, check_profile_uniqueness, fit_case1, fit_case2, fit_case3,
    profile_concavity_interval, RestrictedFit,
};
use crate::lrt::{TestKind, TestSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    KnownRatio,
    Unknown,
    Ordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Auto,
    Chibar,
    Ebar,
    Lrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BootstrapArg {
    Parametric,
    Nonparametric,
    Both,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Aim,
    TwoStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Inc,
    Dec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerationArg {
    Sufficient,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma2Arg {
    Value(f64),
    /// Variance of all observations pooled together.
    Pooled,
}

fn parse_sigma2(s: &str) -> std::result::Result<Sigma2Arg, String> {
    if s.eq_ignore_ascii_case("pooled") {
        return Ok(Sigma2Arg::Pooled);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Sigma2Arg::Value(v)),
        _ => Err(format!("expected a positive number or `pooled`, got `{s}`")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// CSV input with header `level,value` or `level,n,mean,var`; `-` for stdin.
    pub input: PathBuf,

    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,

    /// Known common variance, or `pooled` for the variance of all observations.
    #[arg(long, value_parser = parse_sigma2)]
    pub sigma2: Option<Sigma2Arg>,

    /// Known variance ratios c_i, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,

    #[arg(long, value_enum, default_value = "auto")]
    pub statistic: StatisticArg,

    #[arg(long, value_enum, default_value = "parametric")]
    pub bootstrap: BootstrapArg,

    #[arg(long, default_value_t = 20000)]
    pub replicates: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value_t = crate::data::DEFAULT_TOL)]
    pub tol: f64,

    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,

    #[arg(long, value_enum, default_value = "aim")]
    pub solver: SolverArg,

    /// Direction of the mean trend under the alternative.
    #[arg(long, value_enum, default_value = "inc")]
    pub direction: DirectionArg,

    /// Direction of the variance order in the ordered scenario.
    #[arg(long, value_enum, default_value = "dec")]
    pub variance_direction: DirectionArg,

    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,

    /// Parametric replicate generation.
    #[arg(long, value_enum, default_value = "sufficient")]
    pub generation: GenerationArg,

    /// Bootstrap worker threads (results do not depend on this).
    #[arg(long)]
    pub workers: Option<usize>,

    /// Exit with status 3 when any fit fails to converge.
    #[arg(long)]
    pub strict: bool,

    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Write bootstrap replicate values here, one per line.
    #[arg(long)]
    pub dump_replicates: Option<PathBuf>,
}

fn order(d: DirectionArg) -> Order {
    match d {
        DirectionArg::Inc => Order::Increasing,
        DirectionArg::Dec => Order::Decreasing,
    }
}

/// Replicate values pulled out of the report for `--dump-replicates`.
pub(crate) struct Dumps {
    pub parametric: Option<Vec<f64>>,
    pub nonparametric: Option<Vec<f64>>,
}

/// Fits, tests and bootstraps `data` as requested by `args`.
pub fn build_report(args: &RunArgs, data: &InputData) -> Result<Report> {
    build(args, data).map(|(r, _)| r)
}

pub(crate) fn build(args: &RunArgs, data: &InputData) -> Result<(Report, Dumps)> {
    let stats = data.stats()?;
    let k = stats.k();
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "testing needs at least two levels, found {k}"
        )));
    }
    let wants_np = matches!(args.bootstrap, BootstrapArg::Nonparametric | BootstrapArg::Both);
    if wants_np && data.sample().is_none() {
        return Err(Error::InvalidInput(
            "non-parametric bootstrap needs raw observations (long-format input)".into(),
        ));
    }
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Error::InvalidInput("--tol must be positive".into()));
    }
    if args.max_iter == 0 {
        return Err(Error::InvalidInput("--max-iter must be positive".into()));
    }
    let mut warnings = Vec::new();

    let scenario = match args.scenario {
        ScenarioArg::KnownRatio => Scenario::KnownRatio,
        ScenarioArg::Unknown => Scenario::UnknownVariances,
        ScenarioArg::Ordered => Scenario::OrderedVariances,
    };
    let mut base = ScenarioConfig::new(scenario)
        .with_tol(args.tol)
        .with_max_iter(args.max_iter)
        .with_mean_order(order(args.direction))
        .with_variance_order(order(args.variance_direction));
    base.solver = match args.solver {
        SolverArg::Aim => Solver::Aim,
        SolverArg::TwoStep => Solver::TwoStep,
    };

    let (sigma2, sigma2_source) = match args.sigma2 {
        None => (None, None),
        Some(Sigma2Arg::Value(v)) => (Some(v), Some("given".to_string())),
        Some(Sigma2Arg::Pooled) => (Some(pooled_total_variance(&stats)?), Some("pooled".to_string())),
    };
    // Without explicit ratios, a known σ² fixes them at c_i = σ̄²_i / σ².
    let ratios = match (&args.ratios, sigma2) {
        (Some(r), _) => Some(r.clone()),
        (None, Some(s2)) => Some(stats.var.iter().map(|v| v / s2).collect()),
        (None, None) => None,
    };
    let mut known = ScenarioConfig { scenario: Scenario::KnownRatio, ..base.clone() };
    known.ratios = ratios.clone();
    known.sigma2 = sigma2;

    let kind = match (args.statistic, scenario) {
        (StatisticArg::Auto, Scenario::KnownRatio) if sigma2.is_some() => TestKind::ChiBarSq,
        (StatisticArg::Auto, Scenario::KnownRatio) => TestKind::EBarSq,
        (StatisticArg::Chibar, Scenario::KnownRatio) => TestKind::ChiBarSq,
        (StatisticArg::Ebar, Scenario::KnownRatio) => TestKind::EBarSq,
        (StatisticArg::Auto | StatisticArg::Lrt, Scenario::UnknownVariances) => TestKind::Neg2LogLambdaTilde,
        (StatisticArg::Auto | StatisticArg::Lrt, Scenario::OrderedVariances) => TestKind::Neg2LogLambdaI,
        (s, sc) => {
            return Err(Error::InvalidInput(format!(
                "statistic {s:?} is not available for scenario {sc:?}"
            )))
        }
    };
    let test_cfg = match kind {
        TestKind::ChiBarSq => {
            if args.ratios.is_some() {
                return Err(Error::InvalidInput(
                    "chi-bar-square uses unit ratios; drop --ratios or use --statistic ebar".into(),
                ));
            }
            if sigma2.is_none() {
                return Err(Error::InvalidInput("chi-bar-square needs --sigma2".into()));
            }
            ScenarioConfig { ratios: None, ..known.clone() }
        }
        TestKind::EBarSq => ScenarioConfig { sigma2: None, ..known.clone() },
        _ => base.clone(),
    };
    test_cfg.validate(k)?;
    let setup = TestSetup::new(kind, test_cfg)?;
    let statistic = setup.evaluate(&stats)?;

    let mut row = |name: &str, fit: Result<RestrictedFit>| match fit {
        Ok(f) => Some(f),
        Err(e) => {
            warnings.push(format!("{name} fit unavailable: {e}"));
            None
        }
    };
    let estimates = Estimates {
        levels: stats.levels.clone(),
        n: stats.n.clone(),
        mean: stats.mean.clone(),
        var: stats.var.clone(),
        var_unbiased: stats.var_unbiased.clone(),
        known_ratio: row("known-ratio", fit_case1(&stats, &known)),
        unknown_variances: row(
            "unknown-variance",
            fit_case2(&stats, &ScenarioConfig { scenario: Scenario::UnknownVariances, ..base.clone() }),
        ),
        ordered_variances: row(
            "ordered-variance",
            fit_case3(&stats, &ScenarioConfig { scenario: Scenario::OrderedVariances, ..base.clone() }),
        ),
    };

    let conditions = Conditions {
        condition1: check_condition1(&stats),
        condition2: check_condition2(&stats),
        profile_interval: profile_concavity_interval(&stats),
        profile_unique: check_profile_uniqueness(&stats),
    };
    match scenario {
        Scenario::UnknownVariances if !conditions.condition1 => warnings.push(
            "condition1 fails: uniqueness of the unknown-variance estimate is not certified".into(),
        ),
        Scenario::OrderedVariances if !conditions.condition2 => warnings.push(
            "condition2 fails: uniqueness of the ordered-variance estimate is not certified".into(),
        ),
        _ => {}
    }
    if scenario == Scenario::UnknownVariances && !conditions.profile_unique {
        warnings.push(
            "common-mean profile is not certified unimodal; the null fit used a global scan".into(),
        );
    }

    let mut fits_converged = statistic.converged();
    for (name, fit) in [
        ("known-ratio", &estimates.known_ratio),
        ("unknown-variance", &estimates.unknown_variances),
        ("ordered-variance", &estimates.ordered_variances),
    ] {
        if let Some(f) = fit.as_ref().filter(|f| !f.converged) {
            fits_converged = false;
            warnings.push(format!(
                "{name} fit stopped at the iteration cap ({} iterations)",
                f.iterations
            ));
        }
    }
    if !statistic.null_fit.converged {
        warnings.push("null fit did not converge".into());
    }

    let generation = match args.generation {
        GenerationArg::Sufficient => Generation::SufficientOnly,
        GenerationArg::Raw => Generation::RawSamples,
    };
    let plan = |mode| {
        let mut p = BootstrapPlan::new(mode, setup.clone(), args.replicates, args.seed)
            .with_generation(generation);
        p.workers = args.workers;
        p.keep_replicates = args.dump_replicates.is_some();
        p
    };
    let mut p_values = PValues::default();
    let mut dumps = Dumps { parametric: None, nonparametric: None };
    if matches!(args.bootstrap, BootstrapArg::Parametric | BootstrapArg::Both) {
        let mut r = parametric_bootstrap(
            &statistic.null_fit,
            &stats.n,
            statistic.value,
            &plan(BootstrapMode::Parametric),
        )?;
        warnings.extend(r.warning.clone());
        dumps.parametric = r.replicate_values.take();
        p_values.parametric = Some(r);
    }
    if wants_np {
        let sample = data.sample().expect("checked above");
        let mut r = nonparametric_bootstrap(
            sample,
            &statistic.null_fit,
            statistic.value,
            &plan(BootstrapMode::Nonparametric),
        )?;
        warnings.extend(r.warning.clone());
        dumps.nonparametric = r.replicate_values.take();
        p_values.nonparametric = Some(r);
    }
    let bootstrapped = args.bootstrap != BootstrapArg::None;

    let report = Report {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        input: InputInfo {
            format: data.format(),
            k,
            total: stats.total,
        },
        scenario,
        settings: Settings {
            mean_order: base.mean_order,
            variance_order: base.variance_order,
            solver: base.solver,
            tol: base.tol,
            max_iter: base.max_iter,
            sigma2,
            sigma2_source,
            ratios,
        },
        estimates,
        null_fit: statistic.null_fit.clone(),
        statistic: StatisticBlock {
            kind,
            label: kind.label().to_string(),
            scale: kind.scale().to_string(),
            value: statistic.value,
            converged: statistic.converged(),
            alt_fit: statistic.alt_fit.clone(),
        },
        p_values,
        conditions,
        replicates: bootstrapped.then_some(args.replicates),
        seed: args.seed,
        generation: matches!(args.bootstrap, BootstrapArg::Parametric | BootstrapArg::Both)
            .then_some(generation),
        converged: fits_converged,
        warnings,
    };
    Ok((report, dumps))
}
