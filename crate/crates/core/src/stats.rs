//! Aggregate observables of a wealth snapshot: mean field, dispersion and Gini.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A validated, non-empty set of non-negative wealth values.
#[derive(Debug, Clone, Copy)]
pub struct WealthSample<'a, T> {
    values: &'a [T],
}

impl<'a, T: Real> WealthSample<'a, T> {
    pub fn new(values: &'a [T]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty wealth sample".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero()) || !v.is_finite()) {
            return Err(Error::Domain(format!("wealth values must be finite and non-negative, got {v}")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &'a [T] {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn total(&self) -> T {
        self.values.iter().copied().sum()
    }
}

/// Average wealth per agent.
pub fn mean_field<T: Real>(sample: &WealthSample<'_, T>) -> T {
    sample.total() / T::of_usize(sample.len())
}

/// Population standard deviation (divisor `M`).
pub fn std_dev<T: Real>(sample: &WealthSample<'_, T>) -> T {
    // the rounded mean of identical values can differ from them by an ulp
    let first = sample.values[0];
    if sample.values.iter().all(|&x| x == first) {
        return T::zero();
    }
    let h = mean_field(sample);
    let ss: T = sample.values.iter().map(|&x| (x - h) * (x - h)).sum();
    (ss / T::of_usize(sample.len())).sqrt()
}

fn positive_mean<T: Real>(sample: &WealthSample<'_, T>) -> Result<T> {
    let h = mean_field(sample);
    if h > T::zero() {
        Ok(h)
    } else {
        Err(Error::Domain("Gini coefficient is undefined for zero total wealth".into()))
    }
}

/// Gini coefficient from the sum over all ordered pairs. O(M^2); kept as the
/// reference the sorted algorithm is checked against.
pub fn gini_pairwise<T: Real>(sample: &WealthSample<'_, T>) -> Result<T> {
    let h = positive_mean(sample)?;
    let xs = sample.values;
    let mut acc = T::zero();
    for &p in xs {
        for &q in xs {
            acc = acc + (p - q).abs();
        }
    }
    let m = T::of_usize(xs.len());
    Ok(acc / (T::of(2.0) * m * m * h))
}

/// Gini coefficient in O(M log M).
///
/// With `x` sorted ascending, `sum_k (2k - M - 1) x_k / (M sum x)` equals the
/// pairwise definition. The coefficients are paired from both ends so every
/// term is `(M + 1 - 2k) (x_{M+1-k} - x_k) >= 0`: equal values cancel exactly
/// and no large terms are subtracted.
pub fn gini<T: Real>(sample: &WealthSample<'_, T>) -> Result<T> {
    positive_mean(sample)?;
    let mut sorted = sample.values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(gini_sorted(&sorted))
}

/// Same as [`gini`] for input already sorted ascending with positive total.
pub(crate) fn gini_sorted<T: Real>(sorted: &[T]) -> T {
    let m = sorted.len();
    let mut acc = T::zero();
    for k in 0..m / 2 {
        let weight = T::of_usize(m - 1 - 2 * k);
        acc = acc + weight * (sorted[m - 1 - k] - sorted[k]);
    }
    let total: T = sorted.iter().copied().sum();
    acc / (T::of_usize(m) * total)
}

/// Mean field, dispersion and Gini of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables<T> {
    pub mean: T,
    pub std_dev: T,
    /// `None` when the total wealth is zero.
    pub gini: Option<T>,
}

impl<T: Real> Observables<T> {
    pub fn of(sample: &WealthSample<'_, T>) -> Self {
        Self {
            mean: mean_field(sample),
            std_dev: std_dev(sample),
            gini: gini(sample).ok(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> WealthSample<'_, f64> {
        WealthSample::new(v).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_field(&s(&[1.0, 2.0, 3.0, 4.0])), 2.5);
        assert_eq!(mean_field(&s(&[0.0, 0.0, 0.0, 8.0])), 2.0);
        assert_eq!(mean_field(&s(&[4.5; 9])), 4.5);
    }

    #[test]
    fn std_dev_examples() {
        assert_eq!(std_dev(&s(&[3.0; 5])), 0.0);
        assert_eq!(std_dev(&s(&[0.0, 2.0])), 1.0);
        assert_relative_eq!(std_dev(&s(&[0.0, 0.0, 0.0, 8.0])), 12f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn gini_examples() {
        for g in [gini_pairwise, gini] {
            assert_eq!(g(&s(&[2.0; 7])).unwrap(), 0.0);
            assert_eq!(g(&s(&[0.0, 0.0, 0.0, 8.0])).unwrap(), 0.75);
            assert_eq!(g(&s(&[0.0, 1.0])).unwrap(), 0.5);
        }
    }

    #[test]
    fn invalid_samples() {
        assert!(matches!(WealthSample::<f64>::new(&[]), Err(Error::Domain(_))));
        assert!(matches!(WealthSample::new(&[1.0, -1.0]), Err(Error::Domain(_))));
        assert!(matches!(gini(&s(&[0.0, 0.0])), Err(Error::Domain(_))));
        assert!(matches!(gini_pairwise(&s(&[0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn works_in_f32() {
        let v = [0.0f32, 0.0, 0.0, 8.0];
        let sample = WealthSample::new(&v).unwrap();
        assert_eq!(gini(&sample).unwrap(), 0.75f32);
        assert_eq!(mean_field(&sample), 2.0f32);
    }

    fn wealth() -> impl Strategy<Value = Vec<f64>> {
        // small integer pool so ties and zeros are common
        prop::collection::vec(
            prop_oneof![(0u8..6).prop_map(f64::from), 0.0f64..1e3],
            2..120,
        )
        .prop_filter("positive total", |v| v.iter().any(|&x| x > 0.0))
    }

    proptest! {
        #[test]
        fn sorted_matches_pairwise(v in wealth()) {
            let sample = s(&v);
            let fast = gini(&sample).unwrap();
            let slow = gini_pairwise(&sample).unwrap();
            prop_assert!((fast - slow).abs() <= 1e-10 * slow.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn gini_bounds(v in wealth()) {
            let g = gini(&s(&v)).unwrap();
            let m = v.len() as f64;
            prop_assert!(g >= 0.0);
            prop_assert!(g <= (m - 1.0) / m * (1.0 + 1e-12));
        }

        #[test]
        fn gini_scale_invariant(v in wealth(), c in 1e-3f64..1e3) {
            let g = gini(&s(&v)).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let gs = gini(&s(&scaled)).unwrap();
            prop_assert!((g - gs).abs() <= 1e-12 * g.max(1e-300) + 1e-15);
        }

        #[test]
        fn permutation_invariant(v in wealth(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = v.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let (a, b) = (s(&v), s(&shuffled));
            prop_assert_eq!(gini(&a).unwrap(), gini(&b).unwrap());
            prop_assert!((mean_field(&a) - mean_field(&b)).abs() <= 1e-12 * mean_field(&a));
            prop_assert!((std_dev(&a) - std_dev(&b)).abs() <= 1e-9 * (1.0 + std_dev(&a)));
        }

        #[test]
        fn zero_dispersion_iff_equal(v in wealth()) {
            let all_equal = v.iter().all(|&x| x == v[0]);
            prop_assert_eq!(std_dev(&s(&v)) == 0.0, all_equal);
        }
    }
}
