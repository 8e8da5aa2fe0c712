// Order-restricted estimates of KAM means by carbide count under the three
// variance scenarios.

use monotone_lrt::{
    fit_case1, fit_case2, fit_case3, pooled_total_variance, ScenarioConfig, SufficientStats,
};

fn main() -> Result<(), monotone_lrt::Error> {
    let stats = SufficientStats::from_summary(
        vec![0.0, 1.0, 2.0, 3.0],
        vec![340, 211, 54, 18],
        vec![0.815, 0.833, 0.870, 0.854],
        vec![0.035, 0.024, 0.017, 0.022],
    )?;

    // Known ratios taken as c_i = σ̄²_i / σ², σ² the pooled variance.
    let s2 = pooled_total_variance(&stats)?;
    let ratios = stats.var.iter().map(|v| v / s2).collect();
    let known = fit_case1(&stats, &ScenarioConfig::known_ratio().with_ratios(ratios).with_sigma2(s2))?;
    let unknown = fit_case2(&stats, &ScenarioConfig::unknown_variances())?;
    let ordered = fit_case3(&stats, &ScenarioConfig::ordered_variances())?;

    let row = |label: &str, xs: &[f64]| {
        print!("{label:<14}");
        for x in xs {
            print!("{x:>9.3}");
        }
        println!();
    };
    row("mean", &stats.mean);
    row("var", &stats.var);
    row("mu known", &known.mu);
    row("mu unknown", &unknown.mu);
    row("sigma2", &unknown.sigma2);
    row("mu ordered", &ordered.mu);
    row("sigma2", &ordered.sigma2);
    println!(
        "iterations: unknown {} (converged {}), ordered {} (converged {})",
        unknown.iterations, unknown.converged, ordered.iterations, ordered.converged
    );
    Ok(())
}
