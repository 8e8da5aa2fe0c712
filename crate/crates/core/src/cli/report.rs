//! The `run` report. JSON is the canonical form; [`render_text`] lays the same
//! object out as plain tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::io::InputFormat;
use crate::bootstrap::{BootstrapResult, Generation};
use crate::data::{Order, Scenario, Solver};
use crate::estimation::{NullFit, RestrictedFit};
use crate::lrt::TestKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub input: InputInfo,
    pub scenario: Scenario,
    pub settings: Settings,
    pub estimates: Estimates,
    pub null_fit: NullFit,
    pub statistic: StatisticBlock,
    pub p_values: PValues,
    pub conditions: Conditions,
    pub replicates: Option<usize>,
    pub seed: u64,
    pub generation: Option<Generation>,
    /// Every fit in the report converged.
    pub converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputInfo {
    pub format: InputFormat,
    pub k: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub mean_order: Order,
    pub variance_order: Order,
    pub solver: Solver,
    pub tol: f64,
    pub max_iter: usize,
    pub sigma2: Option<f64>,
    /// `"given"` or `"pooled"` when `sigma2` is set.
    pub sigma2_source: Option<String>,
    pub ratios: Option<Vec<f64>>,
}

/// Per-level summaries and the restricted fits under each variance scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub levels: Vec<f64>,
    pub n: Vec<usize>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub var_unbiased: Vec<Option<f64>>,
    pub known_ratio: Option<RestrictedFit>,
    pub unknown_variances: Option<RestrictedFit>,
    pub ordered_variances: Option<RestrictedFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticBlock {
    pub kind: TestKind,
    pub label: String,
    pub scale: String,
    pub value: f64,
    pub converged: bool,
    pub alt_fit: RestrictedFit,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PValues {
    pub parametric: Option<BootstrapResult>,
    pub nonparametric: Option<BootstrapResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    /// Sufficient for a unique unknown-variance estimate.
    pub condition1: bool,
    /// Sufficient for a unique ordered-variance estimate.
    pub condition2: bool,
    /// Interval on which the common-mean profile is concave.
    pub profile_interval: (f64, f64),
    pub profile_unique: bool,
}

pub fn render_text(r: &Report) -> String {
    let mut s = String::new();
    let k = r.input.k;
    let _ = writeln!(s, "{} {}", r.tool, r.version);
    let _ = writeln!(
        s,
        "input: {:?} format, k = {}, N = {}",
        r.input.format, k, r.input.total
    );
    let _ = writeln!(
        s,
        "scenario: {:?}; means {:?}, variances {:?}; solver {:?}, tol {}, max-iter {}",
        r.scenario,
        r.settings.mean_order,
        r.settings.variance_order,
        r.settings.solver,
        r.settings.tol,
        r.settings.max_iter
    );
    if let Some(s2) = r.settings.sigma2 {
        let src = r.settings.sigma2_source.as_deref().unwrap_or("given");
        let _ = writeln!(s, "sigma2: {s2:.6} ({src})");
    }
    s.push('\n');

    let e = &r.estimates;
    row(&mut s, "level", e.levels.iter().map(|x| format!("{x}")));
    row(&mut s, "n", e.n.iter().map(|x| x.to_string()));
    row(&mut s, "mean", e.mean.iter().map(fmt));
    row(&mut s, "var (1/n)", e.var.iter().map(fmt));
    row(
        &mut s,
        "var (1/(n-1))",
        e.var_unbiased.iter().map(|v| v.map_or("-".into(), |x| fmt(&x))),
    );
    for (name, fit) in [
        ("known ratio", &e.known_ratio),
        ("unknown var", &e.unknown_variances),
        ("ordered var", &e.ordered_variances),
    ] {
        match fit {
            Some(f) => {
                row(&mut s, &format!("{name}: mu"), f.mu.iter().map(fmt));
                row(&mut s, &format!("{name}: sigma2"), f.sigma2.iter().map(fmt));
            }
            None => row(&mut s, &format!("{name}: mu"), (0..k).map(|_| "-".to_string())),
        }
    }
    s.push('\n');

    let nf = &r.null_fit;
    let _ = writeln!(
        s,
        "null fit: mu0 = {:.6}, iterations {}, converged {}",
        nf.mu0, nf.iterations, nf.converged
    );
    row(&mut s, "null sigma2", nf.sigma2.iter().map(fmt));
    let st = &r.statistic;
    let _ = writeln!(s, "statistic: {} = {:.6} (scale {})", st.label, st.value, st.scale);
    for (name, p) in [
        ("parametric", &r.p_values.parametric),
        ("non-parametric", &r.p_values.nonparametric),
    ] {
        if let Some(p) = p {
            let _ = writeln!(
                s,
                "p-value ({name}, M = {}, seed {}): {:.4}  [(#+1)/(M+1) = {:.4}, failures {}]",
                p.replicates, p.seed, p.p_value, p.p_value_plus_one, p.failures
            );
        }
    }
    let c = &r.conditions;
    let _ = writeln!(
        s,
        "conditions: condition1 {}, condition2 {}, profile interval [{:.6}, {:.6}] covers mean range {}",
        yes(c.condition1),
        yes(c.condition2),
        c.profile_interval.0,
        c.profile_interval.1,
        yes(c.profile_unique)
    );
    let _ = writeln!(s, "converged: {}", r.converged);
    if !r.warnings.is_empty() {
        s.push_str("warnings:\n");
        for w in &r.warnings {
            let _ = writeln!(s, "  - {w}");
        }
    }
    s
}

fn row<I: Iterator<Item = String>>(s: &mut String, label: &str, cells: I) {
    let _ = write!(s, "{label:<22}");
    for c in cells {
        let _ = write!(s, "{c:>12}");
    }
    s.push('\n');
}

fn fmt(x: &f64) -> String {
    format!("{x:.6}")
}

fn yes(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}
