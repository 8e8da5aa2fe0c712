// Weighted isotonic and antitonic regression with the pooled blocks.

use monotone_lrt::{antitonic_regression, isotonic_regression, WeightedVector};

fn main() -> Result<(), monotone_lrt::Error> {
    // Level means weighted by n_i / σ̄²_i.
    let means = vec![0.815, 0.833, 0.870, 0.854];
    let weights = vec![340.0 / 0.035, 211.0 / 0.024, 54.0 / 0.017, 18.0 / 0.022];
    let fit = isotonic_regression(&WeightedVector::new(means.clone(), weights)?);
    println!("non-decreasing fit: {:?}", fit.fitted);
    for b in &fit.blocks {
        println!(
            "  block {}..={} value {:.5} weight {:.1}",
            b.start, b.end, b.value, b.weight
        );
    }

    // Variances pooled into a non-increasing sequence, weights n_i.
    let spread = vec![0.035, 0.024, 0.017, 0.022];
    let n = vec![340.0, 211.0, 54.0, 18.0];
    let anti = antitonic_regression(&WeightedVector::new(spread, n)?);
    println!("non-increasing fit: {:?}", anti.fitted);

    // Ties are left alone; the PAVA only pools strict violations.
    let tied = isotonic_regression(&WeightedVector::unweighted(vec![1.0, 1.0, 0.0, 2.0])?);
    println!("with ties: {:?} in {} blocks", tied.fitted, tied.blocks.len());
    Ok(())
}
