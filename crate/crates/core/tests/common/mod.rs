#![allow(dead_code)]

pub mod oracle;

use monotone_lrt::{GroupedSample, SufficientStats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const GND_N: [usize; 4] = [340, 211, 54, 18];
pub const GND_MEAN: [f64; 4] = [0.815, 0.833, 0.870, 0.854];
pub const GND_VAR: [f64; 4] = [0.035, 0.024, 0.017, 0.022];

/// KAM means and variances by carbide count, as tabulated.
pub fn gnd() -> SufficientStats {
    SufficientStats::from_summary(
        vec![0.0, 1.0, 2.0, 3.0],
        GND_N.to_vec(),
        GND_MEAN.to_vec(),
        GND_VAR.to_vec(),
    )
    .unwrap()
}

/// Normal draws rescaled per level so that the sample mean and divisor-`n`
/// variance equal `mean[i]` and `var[i]` exactly (up to rounding).
pub fn sample_with_moments(seed: u64, n: &[usize], mean: &[f64], var: &[f64]) -> GroupedSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obs = (0..n.len())
        .map(|i| {
            let z: Vec<f64> = (0..n[i]).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let (m, v) = oracle::two_pass_moments(&z);
            let scale = (var[i] / v).sqrt();
            z.iter().map(|x| mean[i] + (x - m) * scale).collect()
        })
        .collect();
    GroupedSample::new((0..n.len()).map(|i| i as f64).collect(), obs).unwrap()
}

/// Plain normal sample with the given per-level means and standard deviations.
pub fn normal_sample(rng: &mut ChaCha8Rng, n: &[usize], mean: &[f64], sd: &[f64]) -> GroupedSample {
    let obs = (0..n.len())
        .map(|i| {
            let d = Normal::new(mean[i], sd[i]).unwrap();
            (0..n[i]).map(|_| d.sample(rng)).collect()
        })
        .collect();
    GroupedSample::new((0..n.len()).map(|i| i as f64).collect(), obs).unwrap()
}

/// Random summary statistics: sizes 2..60, means in (−1, 1), variances in
/// (0.05, 1.5); one instance in ten has all means equal.
pub fn random_stats(rng: &mut ChaCha8Rng, k: usize) -> SufficientStats {
    let flat = rng.random_bool(0.1);
    let m0 = rng.random_range(-1.0..1.0);
    SufficientStats::from_summary(
        (0..k).map(|i| i as f64).collect(),
        (0..k).map(|_| rng.random_range(2..60)).collect(),
        (0..k).map(|_| if flat { m0 } else { rng.random_range(-1.0..1.0) }).collect(),
        (0..k).map(|_| rng.random_range(0.05..1.5)).collect(),
    )
    .unwrap()
}
