//! Small statistics helpers: Wilson score interval, two-sample
//! Kolmogorov-Smirnov, and basic moments.

/// Standard normal 97.5% quantile (95% two-sided intervals).
pub const Z_975: f64 = 1.959_963_984_540_054;

/// Wilson score interval for a binomial proportion. Stable at p_hat = 0,
/// where the upper bound is z^2/(n + z^2) rather than 0.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    assert!(n > 0, "wilson interval needs n > 0");
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = p + z2 / (2.0 * nf);
    let rad = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // the interval contains p analytically; clamp away sqrt rounding noise
    (
        ((center - rad) / denom).clamp(0.0, p),
        ((center + rad) / denom).clamp(p, 1.0),
    )
}

/// Sample mean and (n-1)-normalized standard deviation.
pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Two-sample Kolmogorov-Smirnov statistic (sorts its inputs).
pub fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    a.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Large-sample critical value of the two-sample KS statistic at level
/// `alpha`: `c(alpha) sqrt((n+m)/(n m))` with `c(alpha) = sqrt(-ln(alpha/2)/2)`.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_handbook_values() {
        // p_hat = 0: upper bound is z^2/(n + z^2)
        let (lo, hi) = wilson_interval(0, 100, Z_975);
        assert_eq!(lo, 0.0);
        let z2 = Z_975 * Z_975;
        assert!((hi - z2 / (100.0 + z2)).abs() < 1e-12);

        // symmetric case
        let (lo, hi) = wilson_interval(50, 100, Z_975);
        assert!((lo - (1.0 - hi)).abs() < 1e-12);
        assert!(lo < 0.5 && hi > 0.5);

        // ordering invariant
        for k in [0usize, 1, 17, 99, 100] {
            let (lo, hi) = wilson_interval(k, 100, Z_975);
            let p = k as f64 / 100.0;
            assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        }
    }

    #[test]
    fn ks_statistic_basics() {
        let mut a = vec![1.0, 2.0, 3.0, 4.0];
        let mut b = a.clone();
        assert_eq!(two_sample_ks(&mut a, &mut b), 0.0);

        let mut a = vec![0.0, 0.1, 0.2];
        let mut b = vec![10.0, 10.1, 10.2];
        assert_eq!(two_sample_ks(&mut a, &mut b), 1.0);

        // c(0.01) = 1.6276...
        let crit = ks_two_sample_critical(2500, 2500, 0.01);
        assert!((crit - 1.627_624 * (2.0 / 2500.0_f64).sqrt()).abs() < 1e-4);
    }
}
