//! Empirical wealth distributions and their Boltzmann-Gibbs / Pareto classification.
//!
//! The distribution is an equal-width histogram over the sample range. The
//! exponential family is fitted by regressing `ln P` on `x` (semilog), the
//! power law by regressing `ln P` on `ln x` (log-log). A family qualifies when
//! the regression's |correlation| reaches the threshold and its exponent is
//! positive.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::WealthSample;

pub const DEFAULT_BINS: usize = 100;
pub const MIN_BINS: usize = 10;
pub const DEFAULT_THRESHOLD: f64 = 0.96;
/// Regressions need at least this many points.
pub const MIN_FIT_POINTS: usize = 3;

/// Equal-width histogram with densities normalized to unit probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    edges: Vec<T>,
    densities: Vec<T>,
    counts: Vec<u64>,
    sample_count: u64,
}

impl<T: Real> Histogram<T> {
    /// Builds a histogram from a density profile sampled on `edges`, e.g. an
    /// exact analytic density. Densities are rescaled to unit mass and every
    /// bin with positive density gets a nominal count of one.
    pub fn from_densities(edges: Vec<T>, densities: Vec<T>) -> Result<Self> {
        if edges.len() != densities.len() + 1 || densities.is_empty() {
            return Err(Error::Config(format!(
                "{} edges cannot bound {} bins",
                edges.len(),
                densities.len()
            )));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("histogram edges must be strictly ascending".into()));
        }
        if densities.iter().any(|d| !(*d >= T::zero()) || !d.is_finite()) {
            return Err(Error::Config("densities must be finite and non-negative".into()));
        }
        let mass: T = densities
            .iter()
            .zip(edges.windows(2))
            .map(|(&d, w)| d * (w[1] - w[0]))
            .sum();
        if !(mass > T::zero()) {
            return Err(Error::Config("density profile has zero mass".into()));
        }
        let counts: Vec<u64> = densities.iter().map(|&d| u64::from(d > T::zero())).collect();
        let sample_count = counts.iter().sum();
        let densities = densities.into_iter().map(|d| d / mass).collect();
        Ok(Self { edges, densities, counts, sample_count })
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn densities(&self) -> &[T] {
        &self.densities
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn bin_count(&self) -> usize {
        self.densities.len()
    }

    pub fn centers(&self) -> impl Iterator<Item = T> + '_ {
        let half = T::of(0.5);
        self.edges.windows(2).map(move |w| (w[0] + w[1]) * half)
    }

    /// Plain-text rows `bin_center density count`.
    pub fn write_rows<W: Write>(&self, mut w: W) -> io::Result<()> {
        for ((c, d), n) in self.centers().zip(&self.densities).zip(&self.counts) {
            writeln!(w, "{c} {d} {n}")?;
        }
        Ok(())
    }

    /// `(center, density)` of bins with at least `min_count` samples.
    fn populated(&self, min_count: u64) -> impl Iterator<Item = (T, T)> + '_ {
        let min_count = min_count.max(1);
        self.centers()
            .zip(self.densities.iter().copied())
            .zip(self.counts.iter())
            .filter(move |(_, &n)| n >= min_count)
            .map(|(cd, _)| cd)
            .filter(|(_, d)| *d > T::zero())
    }
}

/// Equal-width histogram of `bins` bins spanning `[min, max]` of the sample.
pub fn build_distribution<T: Real>(sample: &WealthSample<'_, T>, bins: usize) -> Result<Histogram<T>> {
    let values = sample.values();
    let (lo, hi) = values
        .iter()
        .fold((values[0], values[0]), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut builder = HistogramBuilder::new(lo, hi, bins, values.len())?;
    builder.add(values);
    Ok(builder.finish())
}

/// Accumulates counts over a fixed range in several batches, for pools too
/// large to hold in memory at once.
#[derive(Debug, Clone)]
pub struct HistogramBuilder<T> {
    lo: T,
    hi: T,
    width: T,
    counts: Vec<u64>,
    added: u64,
}

impl<T: Real> HistogramBuilder<T> {
    /// `count` is the number of samples the range was taken from; only used
    /// for the degenerate-range diagnostic.
    pub fn new(lo: T, hi: T, bins: usize, count: usize) -> Result<Self> {
        if bins < MIN_BINS {
            return Err(Error::Config(format!("need at least {MIN_BINS} bins, got {bins}")));
        }
        if !(hi > lo) {
            return Err(Error::DegenerateDistribution { count, value: lo.to_f64_lossy() });
        }
        Ok(Self {
            lo,
            hi,
            width: (hi - lo) / T::of_usize(bins),
            counts: vec![0; bins],
            added: 0,
        })
    }

    /// Values outside `[lo, hi]` land in the nearest end bin.
    pub fn add(&mut self, values: &[T]) {
        let last = self.counts.len() - 1;
        for &v in values {
            let k = ((v - self.lo) / self.width).floor().to_usize().unwrap_or(0).min(last);
            self.counts[k] += 1;
        }
        self.added += values.len() as u64;
    }

    pub fn finish(self) -> Histogram<T> {
        let bins = self.counts.len();
        let mut edges: Vec<T> = (0..bins).map(|k| self.lo + self.width * T::of_usize(k)).collect();
        edges.push(self.hi);
        let scale = T::one() / (T::of(self.added as f64) * self.width);
        let densities = self.counts.iter().map(|&c| T::of(c as f64) * scale).collect();
        Histogram {
            edges,
            densities,
            counts: self.counts,
            sample_count: self.added,
        }
    }
}

/// Ordinary least squares line with the Pearson correlation of the inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Zero when the response has no variance.
    pub correlation: T,
}

pub fn linear_regression<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::InsufficientData(format!(
            "{} abscissae for {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "regression needs {MIN_FIT_POINTS} points, got {}",
            xs.len()
        )));
    }
    let n = T::of_usize(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if !(sxx > T::zero()) {
        return Err(Error::InsufficientData("all abscissae are equal".into()));
    }
    if ys.iter().all(|&y| y == ys[0]) {
        return Ok(LinearFit { slope: T::zero(), intercept: ys[0], correlation: T::zero() });
    }
    let slope = sxy / sxx;
    let correlation = if syy > T::zero() {
        (sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one())
    } else {
        T::zero()
    };
    Ok(LinearFit { slope, intercept: my - slope * mx, correlation })
}

/// Decay exponent and quality of one distribution family fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<T> {
    /// `mu` for the exponential, `alpha` for the power law (negated slope).
    pub exponent: T,
    pub intercept: T,
    pub correlation: T,
    pub points_used: usize,
}

impl<T: Real> FitResult<T> {
    fn from_line(fit: LinearFit<T>, points_used: usize) -> Self {
        Self {
            exponent: -fit.slope,
            intercept: fit.intercept,
            correlation: fit.correlation,
            points_used,
        }
    }

    fn qualifies(&self, threshold: T) -> bool {
        self.correlation.abs() >= threshold && self.exponent > T::zero()
    }
}

/// Which histogram bins enter the regressions, and the acceptance gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Minimum |correlation| for a family to qualify.
    pub threshold: f64,
    /// Bins with fewer samples are left out of both fits. `1` keeps every
    /// nonzero bin.
    pub min_bin_count: u64,
    /// Power-law fit ignores bins centered below this value.
    pub powerlaw_min_x: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            min_bin_count: 1,
            powerlaw_min_x: None,
        }
    }
}

/// Semilog fit `ln P = c - mu x`.
pub fn fit_exponential<T: Real>(hist: &Histogram<T>, opts: &FitOptions) -> Result<FitResult<T>> {
    let (xs, ys): (Vec<T>, Vec<T>) = hist
        .populated(opts.min_bin_count)
        .map(|(c, d)| (c, d.ln()))
        .unzip();
    let line = linear_regression(&xs, &ys)?;
    Ok(FitResult::from_line(line, xs.len()))
}

/// Log-log fit `ln P = c - alpha ln x` over bins with positive centers.
pub fn fit_powerlaw<T: Real>(hist: &Histogram<T>, opts: &FitOptions) -> Result<FitResult<T>> {
    let min_x = opts.powerlaw_min_x.map(T::of);
    let (xs, ys): (Vec<T>, Vec<T>) = hist
        .populated(opts.min_bin_count)
        .filter(|(c, _)| *c > T::zero() && min_x.is_none_or(|m| *c >= m))
        .map(|(c, d)| (c.ln(), d.ln()))
        .unzip();
    let line = linear_regression(&xs, &ys)?;
    Ok(FitResult::from_line(line, xs.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    BoltzmannGibbs,
    Pareto,
    Unclassified,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::BoltzmannGibbs => "BG",
            Regime::Pareto => "Pareto",
            Regime::Unclassified => "Unclassified",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "BG" => Ok(Regime::BoltzmannGibbs),
            "Pareto" => Ok(Regime::Pareto),
            "Unclassified" => Ok(Regime::Unclassified),
            other => Err(Error::Config(format!("unknown regime label `{other}`"))),
        }
    }
}

/// Outcome of [`classify`]: the label plus both fits when they were computable.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeResult<T> {
    pub regime: Regime,
    pub exponential_fit: Option<FitResult<T>>,
    pub powerlaw_fit: Option<FitResult<T>>,
    pub threshold: f64,
    /// `|corr_winner| - |corr_loser|` when both families passed the gate.
    pub overlap_margin: Option<T>,
}

impl<T: Real> RegimeResult<T> {
    /// Fit of the assigned family, or of the better-correlated one when unclassified.
    pub fn reported_fit(&self) -> Option<&FitResult<T>> {
        match self.regime {
            Regime::BoltzmannGibbs => self.exponential_fit.as_ref(),
            Regime::Pareto => self.powerlaw_fit.as_ref(),
            Regime::Unclassified => match (&self.exponential_fit, &self.powerlaw_fit) {
                (Some(e), Some(p)) => Some(if p.correlation.abs() > e.correlation.abs() { p } else { e }),
                (e, p) => e.as_ref().or(p.as_ref()),
            },
        }
    }
}

/// Labels a histogram Boltzmann-Gibbs, Pareto or unclassified. Never fails;
/// a fit that cannot be computed simply does not qualify.
pub fn classify<T: Real>(hist: &Histogram<T>, opts: &FitOptions) -> RegimeResult<T> {
    let threshold = T::of(opts.threshold);
    let exponential_fit = fit_exponential(hist, opts).ok();
    let powerlaw_fit = fit_powerlaw(hist, opts).ok();
    let bg = exponential_fit.filter(|f| f.qualifies(threshold));
    let pareto = powerlaw_fit.filter(|f| f.qualifies(threshold));
    let (regime, overlap_margin) = match (bg, pareto) {
        (Some(e), Some(p)) => {
            let (ce, cp) = (e.correlation.abs(), p.correlation.abs());
            let margin = (ce - cp).abs();
            if cp > ce {
                (Regime::Pareto, Some(margin))
            } else {
                (Regime::BoltzmannGibbs, Some(margin))
            }
        }
        (Some(_), None) => (Regime::BoltzmannGibbs, None),
        (None, Some(_)) => (Regime::Pareto, None),
        (None, None) => (Regime::Unclassified, None),
    };
    RegimeResult {
        regime,
        exponential_fit,
        powerlaw_fit,
        threshold: opts.threshold,
        overlap_margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use approx::assert_relative_eq;

    fn grid(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
        (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect()
    }

    fn profile(edges: &[f64], f: impl Fn(f64) -> f64) -> Histogram<f64> {
        let dens = edges.windows(2).map(|w| f(0.5 * (w[0] + w[1]))).collect();
        Histogram::from_densities(edges.to_vec(), dens).unwrap()
    }

    #[test]
    fn regression_exact_line() {
        let fit = linear_regression(&[0.0f64, 1.0, 2.0], &[1.0, 4.0, 7.0]).unwrap();
        assert_eq!(fit.slope, 3.0);
        assert_eq!(fit.intercept, 1.0);
        assert_eq!(fit.correlation.abs(), 1.0);
    }

    #[test]
    fn regression_constant_response() {
        let fit = linear_regression(&[0.0f64, 1.0, 2.0, 5.0], &[2.0; 4]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.correlation, 0.0);
    }

    #[test]
    fn regression_rejects_degenerate_input() {
        assert!(matches!(linear_regression(&[0.0, 1.0], &[0.0, 1.0]), Err(Error::InsufficientData(_))));
        assert!(matches!(linear_regression(&[1.0; 4], &[0.0, 1.0, 2.0, 3.0]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn regression_on_noise_is_uncorrelated() {
        let xs = synthetic::uniform_samples(1000, 0.0, 1.0, 11);
        let ys = synthetic::uniform_samples(1000, 0.0, 1.0, 12);
        let fit = linear_regression(&xs, &ys).unwrap();
        assert!(fit.correlation.abs() < 0.2, "{}", fit.correlation);
    }

    #[test]
    fn histogram_conserves_samples() {
        let v = synthetic::exponential_samples(2.0, 10_000, 3);
        let h = build_distribution(&WealthSample::new(&v).unwrap(), 37).unwrap();
        assert_eq!(h.counts().iter().sum::<u64>(), 10_000);
        assert_eq!(h.sample_count(), 10_000);
        let mass: f64 = h.densities().iter().zip(h.edges().windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-12);
        assert!(h.edges().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn batched_builder_matches_one_shot() {
        let v = synthetic::exponential_samples(0.7, 5_000, 21);
        let one = build_distribution(&WealthSample::new(&v).unwrap(), 64).unwrap();
        let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        let mut b = HistogramBuilder::new(lo, hi, 64, v.len()).unwrap();
        for chunk in v.chunks(333) {
            b.add(chunk);
        }
        assert_eq!(b.finish(), one);
    }

    #[test]
    fn histogram_errors() {
        let same = [3.0; 10];
        assert!(matches!(
            build_distribution(&WealthSample::new(&same).unwrap(), 20),
            Err(Error::DegenerateDistribution { count: 10, .. })
        ));
        let v = [1.0, 2.0, 3.0];
        assert!(matches!(build_distribution(&WealthSample::new(&v).unwrap(), 5), Err(Error::Config(_))));
    }

    #[test]
    fn histogram_tracks_exponential_density() {
        let v = synthetic::exponential_samples(2.0, 1_000_000, 99);
        let h = build_distribution(&WealthSample::new(&v).unwrap(), 100).unwrap();
        // bulk: bins holding at least 10^4 samples (1% counting noise)
        let width = h.edges()[1] - h.edges()[0];
        for ((c, d), n) in h.centers().zip(h.densities()).zip(h.counts()) {
            if *n < 10_000 {
                continue;
            }
            // exact bin average of 2 e^{-2x} over the bin, relative to the value at the center
            let lo = c - 0.5 * width;
            let avg = ((-2.0 * lo).exp() - (-2.0 * (lo + width)).exp()) / width;
            assert!((d / avg - 1.0).abs() < 0.05, "x={c} density {d} expected {avg}");
            assert!((d / (2.0 * (-2.0 * c).exp()) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn exact_exponential_profile() {
        let h = profile(&grid(0.0, 5.0, 50), |x| 3.0 * (-2.0 * x).exp());
        let fit = fit_exponential(&h, &FitOptions::default()).unwrap();
        assert_relative_eq!(fit.exponent, 2.0, max_relative = 1e-12);
        assert_relative_eq!(fit.correlation, -1.0, max_relative = 1e-12);
        assert_eq!(fit.points_used, 50);
        assert_eq!(classify(&h, &FitOptions::default()).regime, Regime::BoltzmannGibbs);
    }

    #[test]
    fn exact_powerlaw_profile() {
        let h = profile(&grid(1.0, 50.0, 100), |x| 7.0 * x.powf(-2.5));
        let fit = fit_powerlaw(&h, &FitOptions::default()).unwrap();
        assert_relative_eq!(fit.exponent, 2.5, max_relative = 1e-12);
        assert_relative_eq!(fit.correlation.abs(), 1.0, max_relative = 1e-12);
        assert_eq!(classify(&h, &FitOptions::default()).regime, Regime::Pareto);
    }

    #[test]
    fn flat_profile_is_unclassified() {
        let h = profile(&grid(0.5, 10.0, 40), |_| 1.0);
        let r = classify(&h, &FitOptions::default());
        assert_eq!(r.regime, Regime::Unclassified);
        assert_eq!(r.exponential_fit.unwrap().correlation, 0.0);
        assert_eq!(r.powerlaw_fit.unwrap().correlation, 0.0);
    }

    #[test]
    fn growing_profile_fails_sign_gate() {
        let h = profile(&grid(0.0, 3.0, 30), |x| (1.5 * x).exp());
        let r = classify(&h, &FitOptions::default());
        assert!(r.exponential_fit.unwrap().correlation > 0.99);
        assert_eq!(r.regime, Regime::Unclassified);
    }

    #[test]
    fn horizontal_scaling() {
        let c = 4.0;
        let base = profile(&grid(1.0, 40.0, 60), |x| x.powf(-2.7));
        let stretched = profile(&grid(c, 40.0 * c, 60), |x| (x / c).powf(-2.7));
        let opts = FitOptions::default();
        assert_relative_eq!(
            fit_powerlaw(&base, &opts).unwrap().exponent,
            fit_powerlaw(&stretched, &opts).unwrap().exponent,
            max_relative = 1e-10
        );
        let base = profile(&grid(0.0, 6.0, 60), |x| (-1.3 * x).exp());
        let stretched = profile(&grid(0.0, 6.0 * c, 60), |x| (-1.3 * x / c).exp());
        assert_relative_eq!(
            fit_exponential(&stretched, &opts).unwrap().exponent,
            fit_exponential(&base, &opts).unwrap().exponent / c,
            max_relative = 1e-10
        );
    }

    #[test]
    fn powerlaw_min_x_cut() {
        // bins centered at 0.5, 1.5, ... but a minimum-x cut can starve the fit
        let h = profile(&grid(0.0, 10.0, 10), |x| x.powf(-2.0));
        assert_eq!(fit_powerlaw(&h, &FitOptions::default()).unwrap().points_used, 10);
        let opts = FitOptions { powerlaw_min_x: Some(8.0), ..FitOptions::default() };
        assert!(matches!(fit_powerlaw(&h, &opts), Err(Error::InsufficientData(_))));
        let r = classify(&h, &opts);
        assert!(r.powerlaw_fit.is_none());
        assert!(r.exponential_fit.is_some());
    }

    #[test]
    fn too_few_bins_is_insufficient() {
        let mut dens = vec![0.0; 20];
        dens[3] = 1.0;
        dens[9] = 0.5;
        let h = Histogram::from_densities(grid(0.0, 20.0, 20), dens).unwrap();
        assert!(matches!(fit_exponential(&h, &FitOptions::default()), Err(Error::InsufficientData(_))));
        assert_eq!(classify(&h, &FitOptions::default()).regime, Regime::Unclassified);
    }

    #[test]
    fn sampled_exponential_recovers_rate() {
        let v = synthetic::exponential_samples(1.5, 100_000, 2024);
        let h = build_distribution(&WealthSample::new(&v).unwrap(), DEFAULT_BINS).unwrap();
        let fit = fit_exponential(&h, &synthetic::RECOVERY_FIT).unwrap();
        assert!((1.35..=1.65).contains(&fit.exponent), "mu = {}", fit.exponent);
        let cross = fit_powerlaw(&h, &synthetic::RECOVERY_FIT).unwrap();
        assert!(cross.correlation.abs() < 0.9, "power law corr {}", cross.correlation);
    }

    #[test]
    fn sampled_pareto_recovers_exponent() {
        let v = synthetic::pareto_samples(2.5, 100_000, 77);
        let h = build_distribution(&WealthSample::new(&v).unwrap(), DEFAULT_BINS).unwrap();
        let fit = fit_powerlaw(&h, &synthetic::RECOVERY_FIT).unwrap();
        assert!((2.25..=2.75).contains(&fit.exponent), "alpha = {}", fit.exponent);
        let cross = fit_exponential(&h, &synthetic::RECOVERY_FIT).unwrap();
        assert!(cross.correlation.abs() < DEFAULT_THRESHOLD, "exponential corr {}", cross.correlation);
    }

    #[test]
    fn histogram_rows() {
        let h = profile(&grid(0.0, 10.0, 10), |x| 1.0 + x);
        let mut out = Vec::new();
        h.write_rows(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with("0.5 "));
        assert!(text.lines().all(|l| l.split(' ').count() == 3));
    }
}
