// Decreasing trends and increasing variance orders, and the two stopping
// rules for the alternating fit.

use monotone_lrt::{fit_case2, fit_case3, lrt_unknown, Order, ScenarioConfig, Solver, SufficientStats};

fn main() -> Result<(), monotone_lrt::Error> {
    let stats = SufficientStats::from_summary(
        vec![10.0, 20.0, 40.0, 80.0],
        vec![25, 25, 25, 25],
        vec![5.1, 4.6, 4.8, 3.9],
        vec![0.4, 0.5, 0.9, 1.1],
    )?;

    let down = ScenarioConfig::unknown_variances().with_mean_order(Order::Decreasing);
    let up = ScenarioConfig::unknown_variances();
    println!("decreasing fit: {:?}", fit_case2(&stats, &down)?.mu);
    println!("-2 log L, decreasing alternative: {:.4}", lrt_unknown(&stats, &down)?.value);
    println!("-2 log L, increasing alternative: {:.4}", lrt_unknown(&stats, &up)?.value);

    let widening = ScenarioConfig::ordered_variances()
        .with_mean_order(Order::Decreasing)
        .with_variance_order(Order::Increasing);
    let fit = fit_case3(&stats, &widening)?;
    println!("variances non-decreasing: {:?}", fit.sigma2);

    for solver in [Solver::Aim, Solver::TwoStep] {
        let fit = fit_case2(&stats, &down.clone().with_solver(solver).with_tol(1e-8))?;
        println!("{solver:?}: {} iterations, log-lik {:.8}", fit.iterations, fit.log_lik);
    }
    Ok(())
}
