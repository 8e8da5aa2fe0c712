//! Slow reference implementations used only by tests.
//!
//! Everything here works on plain slices and uses only `std`, so it shares no
//! code with the fitters it checks.

#![allow(dead_code)]

/// Max-min representation of weighted isotonic regression:
/// `f_i = max_{s ≤ i} min_{t ≥ i} Av(s..=t)`. O(k³).
pub fn isotonic_maxmin(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let k = values.len();
    assert!(k <= 12, "max-min oracle is cubic; keep k small");
    let avg = |s: usize, t: usize| {
        let (mut sw, mut swg) = (0.0, 0.0);
        for u in s..=t {
            sw += weights[u];
            swg += weights[u] * values[u];
        }
        swg / sw
    };
    (0..k)
        .map(|i| {
            (0..=i)
                .map(|s| (i..k).map(|t| avg(s, t)).fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Two-pass mean and divisor-`n` variance.
pub fn two_pass_moments(obs: &[f64]) -> (f64, f64) {
    let n = obs.len() as f64;
    let mean = obs.iter().sum::<f64>() / n;
    let var = obs.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    (mean, var)
}

#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        assert!(lo <= hi && points >= 2);
        Self { lo, hi, points }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn at(&self, j: usize) -> f64 {
        if j + 1 == self.points {
            self.hi
        } else {
            self.lo + self.step() * j as f64
        }
    }
}

/// Normal log-likelihood from moments, constant dropped.
pub fn log_lik(n: &[usize], mean: &[f64], var: &[f64], mu: &[f64], sigma2: &[f64]) -> f64 {
    (0..n.len())
        .map(|i| {
            let ni = n[i] as f64;
            let d = mean[i] - mu[i];
            -0.5 * ni * sigma2[i].ln() - ni * (var[i] + d * d) / (2.0 * sigma2[i])
        })
        .sum()
}

/// Profile log-likelihood of a common mean with free variances,
/// `−½ Σ n_i ln(σ̄²_i + (ȳ_i − μ)²)`.
pub fn null_profile(n: &[usize], mean: &[f64], var: &[f64], mu: f64) -> f64 {
    (0..n.len())
        .map(|i| {
            let d = mean[i] - mu;
            -0.5 * n[i] as f64 * (var[i] + d * d).ln()
        })
        .sum()
}

/// Exhaustive scan of the common-mean profile over a grid.
pub fn profile_grid_max(n: &[usize], mean: &[f64], var: &[f64], grid: GridSpec) -> (f64, f64) {
    let mut best = (grid.lo, f64::NEG_INFINITY);
    for j in 0..grid.points {
        let mu = grid.at(j);
        let v = null_profile(n, mean, var, mu);
        if v > best.1 {
            best = (mu, v);
        }
    }
    best
}

/// Best non-increasing variance vector for fixed centres, by enumerating every
/// partition of the levels into consecutive blocks and keeping the feasible
/// pooled solutions.
pub fn best_ordered_variances(n: &[usize], mean: &[f64], var: &[f64], mu: &[f64]) -> (Vec<f64>, f64) {
    let k = n.len();
    let spread: Vec<f64> = (0..k).map(|i| var[i] + (mean[i] - mu[i]).powi(2)).collect();
    let mut best = (vec![], f64::NEG_INFINITY);
    for mask in 0u32..(1 << (k - 1)) {
        // Bit b set: a block boundary between b and b+1.
        let mut sigma2 = vec![0.0; k];
        let mut start = 0;
        for i in 0..k {
            if i + 1 == k || mask & (1 << i) != 0 {
                let sw: f64 = (start..=i).map(|u| n[u] as f64).sum();
                let swv: f64 = (start..=i).map(|u| n[u] as f64 * spread[u]).sum();
                for s in &mut sigma2[start..=i] {
                    *s = swv / sw;
                }
                start = i + 1;
            }
        }
        if sigma2.windows(2).all(|w| w[0] >= w[1]) {
            let v = log_lik(n, mean, var, mu, &sigma2);
            if v > best.1 {
                best = (sigma2, v);
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Common mean.
    Null,
    /// Non-decreasing means.
    Alternative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeMax {
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub value: f64,
}

/// Maximum of the log-likelihood over non-increasing variances and either a
/// common mean or non-decreasing means on a grid. Only `k ≤ 3` is supported.
pub fn cone_grid_max(
    n: &[usize],
    mean: &[f64],
    var: &[f64],
    hypothesis: Hypothesis,
    grid: GridSpec,
) -> Result<ConeMax, String> {
    let k = n.len();
    if k > 3 {
        return Err(format!("unsupported: cone grid over k = {k} > 3 levels"));
    }
    let mut best = ConeMax {
        mu: vec![],
        sigma2: vec![],
        value: f64::NEG_INFINITY,
    };
    let mut consider = |mu: Vec<f64>| {
        let (sigma2, value) = best_ordered_variances(n, mean, var, &mu);
        if value > best.value {
            best = ConeMax { mu, sigma2, value };
        }
    };
    match hypothesis {
        Hypothesis::Null => {
            for j in 0..grid.points {
                consider(vec![grid.at(j); k]);
            }
        }
        Hypothesis::Alternative => {
            let mut idx = vec![0usize; k];
            loop {
                consider(idx.iter().map(|&j| grid.at(j)).collect());
                // Next non-decreasing index tuple.
                let mut p = k;
                loop {
                    if p == 0 {
                        return Ok(best);
                    }
                    p -= 1;
                    if idx[p] + 1 < grid.points {
                        idx[p] += 1;
                        let v = idx[p];
                        for q in idx.iter_mut().skip(p + 1) {
                            *q = v;
                        }
                        break;
                    }
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod self_checks {
    #[allow(unused_imports)]
    use super::*;

    #[test]
    fn maxmin_sorted_identity() {
        assert_eq!(isotonic_maxmin(&[1.0, 2.0, 3.0], &[1.0, 4.0, 2.0]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn maxmin_gnd() {
        let n = [340.0, 211.0, 54.0, 18.0];
        let var = [0.035, 0.024, 0.017, 0.022];
        let w: Vec<f64> = n.iter().zip(&var).map(|(n, v)| n / v).collect();
        let f = isotonic_maxmin(&[0.815, 0.833, 0.870, 0.854], &w);
        for (a, b) in f.iter().zip([0.815, 0.833, 0.867, 0.867]) {
            assert!((a - b).abs() < 5e-4);
        }
    }

    #[test]
    fn profile_symmetric_and_single() {
        let g = GridSpec::new(-1.0, 1.0, 2001);
        let (arg, _) = profile_grid_max(&[10, 10], &[-1.0, 1.0], &[2.0, 2.0], g);
        assert!(arg.abs() <= g.step());
        let (arg, _) = profile_grid_max(&[5], &[0.3], &[1.0], GridSpec::new(0.3, 0.3, 2));
        assert_eq!(arg, 0.3);
    }

    #[test]
    fn cone_inactive_constraints_recover_data() {
        let n = [20, 20, 20];
        let mean = [0.0, 0.5, 1.0];
        let var = [3.0, 2.0, 1.0];
        let g = GridSpec::new(0.0, 1.0, 21);
        let best = cone_grid_max(&n, &mean, &var, Hypothesis::Alternative, g).unwrap();
        for i in 0..3 {
            assert!((best.mu[i] - mean[i]).abs() < 1e-12);
            assert!((best.sigma2[i] - var[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cone_constant_means_coincide() {
        let n = [10, 15, 20];
        let mean = [0.4, 0.4, 0.4];
        let var = [1.0, 0.8, 0.9];
        let g = GridSpec::new(0.0, 1.0, 51);
        let h0 = cone_grid_max(&n, &mean, &var, Hypothesis::Null, g).unwrap();
        let h1 = cone_grid_max(&n, &mean, &var, Hypothesis::Alternative, g).unwrap();
        assert!((h0.value - h1.value).abs() < 1e-12);
    }

    #[test]
    fn cone_rejects_large_k() {
        let g = GridSpec::new(0.0, 1.0, 3);
        assert!(cone_grid_max(&[1; 4], &[0.0; 4], &[1.0; 4], Hypothesis::Null, g).is_err());
    }
}
