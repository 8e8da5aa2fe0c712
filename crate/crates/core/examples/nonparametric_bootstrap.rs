// Residual-resampling bootstrap on raw data, next to the parametric one.

use monotone_lrt::bootstrap::standardized_residuals;
use monotone_lrt::{
    nonparametric_bootstrap, parametric_bootstrap, summarize, BootstrapMode, BootstrapPlan,
    GroupedSample, ScenarioConfig, TestSetup,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), monotone_lrt::Error> {
    // Skewed errors: the gamma-like sum of two squares breaks normality.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let z = Normal::new(0.0, 1.0).unwrap();
    let means = [1.0, 1.03, 1.08, 1.06];
    let sizes = [60, 45, 30, 20];
    let observations = (0..4)
        .map(|i| {
            (0..sizes[i])
                .map(|_| {
                    let (a, b): (f64, f64) = (z.sample(&mut rng), z.sample(&mut rng));
                    means[i] + 0.3 * ((a * a + b * b) / 2.0 - 1.0)
                })
                .collect()
        })
        .collect();
    let sample = GroupedSample::new(vec![0.0, 1.0, 2.0, 3.0], observations)?;
    let stats = summarize(&sample)?;
    let residuals = standardized_residuals(&sample)?;
    println!("{} pooled residuals", residuals.len());

    let setup = TestSetup::auto(ScenarioConfig::unknown_variances());
    let observed = setup.evaluate(&stats)?;
    let par = BootstrapPlan::new(BootstrapMode::Parametric, setup.clone(), 5_000, 3);
    let np = BootstrapPlan::new(BootstrapMode::Nonparametric, setup, 5_000, 3);
    let p = parametric_bootstrap(&observed.null_fit, &stats.n, observed.value, &par)?;
    let q = nonparametric_bootstrap(&sample, &observed.null_fit, observed.value, &np)?;
    println!("statistic {:.4}", observed.value);
    println!("parametric p = {:.4}, non-parametric p = {:.4}", p.p_value, q.p_value);
    Ok(())
}
