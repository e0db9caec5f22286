//! Seeded samplers with known distributions, used to check that the fitting
//! pipeline recovers the exponents it is given.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::fit::FitOptions;

/// Fit settings for synthetic recovery: the default gate, with bins holding
/// fewer than five samples left out. Sparse tail bins of an unbounded
/// exponential otherwise bias the semilog slope low.
pub const RECOVERY_FIT: FitOptions = FitOptions {
    threshold: crate::fit::DEFAULT_THRESHOLD,
    min_bin_count: 5,
    powerlaw_min_x: None,
};

/// Support of [`pareto_samples`]. Equal-width bins over an unbounded power
/// law put nearly every sample in the first bin, so the tail is truncated to
/// a dynamic range of 30, comparable to the lattice wealth tails.
pub const PARETO_RANGE: (f64, f64) = (1.0, 30.0);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_samples(n: usize, low: f64, high: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    (0..n).map(|_| rng.random_range(low..high)).collect()
}

/// Samples with density `rate * exp(-rate * x)` on `[0, inf)`.
pub fn exponential_samples(rate: f64, n: usize, seed: u64) -> Vec<f64> {
    let exp = Exp::new(rate).expect("rate must be positive");
    exp.sample_iter(rng(seed)).take(n).collect()
}

/// Samples with density proportional to `x^-alpha` on `[low, high]`, by
/// inverting the truncated CDF.
pub fn pareto_samples_between(alpha: f64, low: f64, high: f64, n: usize, seed: u64) -> Vec<f64> {
    assert!(0.0 < low && low < high, "need 0 < low < high");
    let mut rng = rng(seed);
    let k = 1.0 - alpha;
    if k.abs() < 1e-12 {
        let ratio = high / low;
        return (0..n).map(|_| low * ratio.powf(rng.random::<f64>())).collect();
    }
    let (a, b) = (low.powf(k), high.powf(k));
    (0..n)
        .map(|_| (a + rng.random::<f64>() * (b - a)).powf(1.0 / k))
        .collect()
}

/// Power-law samples with exponent `alpha` on [`PARETO_RANGE`].
pub fn pareto_samples(alpha: f64, n: usize, seed: u64) -> Vec<f64> {
    pareto_samples_between(alpha, PARETO_RANGE.0, PARETO_RANGE.1, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samplers_are_seeded() {
        assert_eq!(exponential_samples(1.0, 10, 4), exponential_samples(1.0, 10, 4));
        assert_ne!(exponential_samples(1.0, 10, 4), exponential_samples(1.0, 10, 5));
        assert_eq!(pareto_samples(2.0, 10, 4), pareto_samples(2.0, 10, 4));
    }

    #[test]
    fn pareto_support_and_median() {
        let v = pareto_samples_between(3.0, 1.0, 10.0, 200_000, 8);
        assert!(v.iter().all(|x| (1.0..=10.0).contains(x)));
        // CDF(x) = (1 - x^-2) / (1 - 10^-2); median solves CDF = 1/2
        let median_exact = (1.0 - 0.5 * (1.0 - 0.01f64)).powf(-0.5);
        let below = v.iter().filter(|&&x| x < median_exact).count() as f64 / v.len() as f64;
        assert!((below - 0.5).abs() < 0.005, "{below}");
    }

    #[test]
    fn exponential_mean() {
        let v = exponential_samples(2.5, 200_000, 1);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 0.4).abs() < 0.005);
    }
}
