//! Detection-rate statistics.

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `C(n, k)` as a float.
pub fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that a uniformly guessed `λ/2`-subset equals a fixed one.
pub fn guess_probability(lambda: usize) -> f64 {
    1.0 / binomial(lambda as u64, lambda as u64 / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert!((guess_probability(8) - 1.0 / 70.0).abs() < 1e-15);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(10, 700, Z_99);
        assert!(lo < 10.0 / 700.0 && 10.0 / 700.0 < hi);
        assert!(lo > 0.005 && hi < 0.032, "{lo} {hi}");
        assert_eq!(wilson_interval(0, 0, Z_99), (0.0, 1.0));
        let (lo, hi) = wilson_interval(0, 100, Z_99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.07);
    }
}
