//! Built-in correctness checks: Gini against its pairwise definition, exact
//! statistic identities, the lattice update against a naive two-pass
//! reference, and exponent recovery from seeded synthetic samples.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fit::{build_distribution, classify, Regime, DEFAULT_BINS};
use crate::lattice::{Dims, LatticeState, ModelParams, Topology};
use crate::stats::{gini, gini_pairwise, std_dev, WealthSample};
use crate::synthetic::{exponential_samples, pareto_samples, RECOVERY_FIT};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {} ({:.2?})", self.name, self.detail, self.elapsed)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn timed(name: &'static str, body: impl FnOnce() -> (bool, String)) -> Check {
    let start = Instant::now();
    let (passed, detail) = body();
    Check { name, passed, detail, elapsed: start.elapsed() }
}

/// Random non-negative sample with many ties and zeros.
fn tied_sample(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let levels = rng.random_range(1..=len.max(2));
    let mut v: Vec<f64> = (0..len)
        .map(|_| match rng.random_range(0..4) {
            0 => 0.0,
            1 => rng.random_range(0..levels) as f64,
            _ => rng.random::<f64>() * 1e3,
        })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[0] = 1.0;
    }
    v
}

/// Sorted Gini against the pairwise sum on `samples` random inputs of 2..=2000 values.
pub fn gini_oracle(samples: usize, seed: u64) -> Check {
    timed("gini oracle equivalence", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let len = rng.random_range(2..=2000);
            let v = tied_sample(&mut rng, len);
            let s = WealthSample::new(&v).expect("valid sample");
            let fast = gini(&s).expect("positive total");
            let slow = gini_pairwise(&s).expect("positive total");
            let rel = if slow == 0.0 { fast.abs() } else { (fast - slow).abs() / slow };
            worst = worst.max(rel);
        }
        (worst <= 1e-10, format!("{samples} samples, worst relative error {worst:.3e}"))
    })
}

pub fn statistic_identities() -> Check {
    timed("statistic identities", || {
        let mut failures = Vec::new();
        for m in [1usize, 2, 3, 10, 1000, 4097] {
            let uniform = vec![7.25; m];
            let s = WealthSample::new(&uniform).unwrap();
            if gini(&s).unwrap() != 0.0 {
                failures.push(format!("gini(uniform, M={m}) != 0"));
            }
            if std_dev(&s) != 0.0 {
                failures.push(format!("sigma(uniform, M={m}) != 0"));
            }
            let mut takes_all = vec![0.0; m];
            takes_all[m / 2] = 3.5;
            let g = gini(&WealthSample::new(&takes_all).unwrap()).unwrap();
            if g != (m as f64 - 1.0) / m as f64 {
                failures.push(format!("gini(one takes all, M={m}) = {g}"));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let v = tied_sample(&mut rng, 500);
            let g = gini(&WealthSample::new(&v).unwrap()).unwrap();
            for c in [1e-3, 1.0, 1e3] {
                let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
                let gs = gini(&WealthSample::new(&scaled).unwrap()).unwrap();
                if (gs - g).abs() > 1e-12 * g {
                    failures.push(format!("scale {c}: {gs} vs {g}"));
                }
            }
        }
        let detail = if failures.is_empty() { "all exact".to_string() } else { failures.join("; ") };
        (failures.is_empty(), detail)
    })
}

/// All local fields first, then every new value: the textbook synchronous update.
pub fn reference_step(state: &LatticeState<f64>, params: &ModelParams<f64>, topology: Topology) -> Vec<f64> {
    let fields: Vec<f64> = (0..state.values().len())
        .map(|i| state.local_field(topology, i).expect("compatible topology"))
        .collect();
    state
        .values()
        .iter()
        .zip(&fields)
        .map(|(&x, &psi)| params.map(x, psi))
        .collect()
}

fn random_case(rng: &mut ChaCha8Rng) -> (LatticeState<f64>, ModelParams<f64>, Topology) {
    let topology = Topology::ALL[rng.random_range(0..3)];
    let side = rng.random_range(3..=12);
    let dims = if topology.is_square() { Dims::Square(side) } else { Dims::Ring(side * side) };
    let values = (0..dims.site_count())
        .map(|_| if rng.random_range(0..8) == 0 { 0.0 } else { rng.random::<f64>() * 100.0 })
        .collect();
    let state = LatticeState::from_values(dims, values, rng.random_range(0..100)).unwrap();
    let params = ModelParams::new(rng.random_range(0.1..30.0), rng.random_range(0.0..2.0)).unwrap();
    (state, params, topology)
}

/// Step against [`reference_step`], the uniform `a = 1` law and translation symmetry.
pub fn map_correctness(cases: usize, seed: u64) -> Check {
    timed("map correctness", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = Vec::new();
        for k in 0..cases {
            let (state, params, topology) = random_case(&mut rng);
            let next = state.step(&params, topology).unwrap();
            let expected = reference_step(&state, &params, topology);
            let same = next.values().iter().zip(&expected).all(|(a, b)| a.to_bits() == b.to_bits());
            if !same || next.time() != state.time() + 1 {
                failures.push(format!("case {k}: step differs from two-pass reference"));
            }
        }
        for topology in Topology::ALL {
            for (c, r) in [(1.0, 4.0), (37.5, 0.3), (0.125, 10.0)] {
                let dims = topology.dims_for_side(5);
                let next = LatticeState::uniform(dims, c)
                    .unwrap()
                    .step(&ModelParams::new(r, 1.0).unwrap(), topology)
                    .unwrap();
                if next.values().iter().any(|&x| x != r * c) {
                    failures.push(format!("{topology}: uniform {c} at a=1, r={r} is not {}", r * c));
                }
            }
            for (rows, cols) in [(1, 1), (0, -2), (3, 5)] {
                let dims = topology.dims_for_side(7);
                let values = (0..dims.site_count()).map(|_| rng.random::<f64>() * 50.0).collect();
                let state = LatticeState::from_values(dims, values, 0).unwrap();
                let params = ModelParams::new(6.0, 0.7).unwrap();
                let a = state.cyclic_shift(rows, cols).step(&params, topology).unwrap();
                let b = state.step(&params, topology).unwrap().cyclic_shift(rows, cols);
                if a != b {
                    failures.push(format!("{topology}: shift ({rows}, {cols}) does not commute with step"));
                }
            }
        }
        let detail = if failures.is_empty() {
            format!("{cases} random cases bit-exact, uniform law and 3 shifts per topology hold")
        } else {
            failures.join("; ")
        };
        (failures.is_empty(), detail)
    })
}

/// Fraction of trials classified as the right family with the exponent
/// within 10%, for exponential rates in [0.5, 5] and Pareto exponents in [2, 4].
pub fn fit_recovery(trials: usize, samples: usize, seed: u64) -> Check {
    timed("fit recovery", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut bg_ok, mut pareto_ok) = (0usize, 0usize);
        let mut worst = (0.0f64, 0.0f64);
        for _ in 0..trials {
            let mu = rng.random_range(0.5..=5.0);
            let v = exponential_samples(mu, samples, rng.random());
            let h = build_distribution(&WealthSample::new(&v).unwrap(), DEFAULT_BINS).unwrap();
            let res = classify(&h, &RECOVERY_FIT);
            let err = res.exponential_fit.map_or(f64::INFINITY, |f| (f.exponent - mu).abs() / mu);
            worst.0 = worst.0.max(err);
            bg_ok += usize::from(res.regime == Regime::BoltzmannGibbs && err <= 0.1);

            let alpha = rng.random_range(2.0..=4.0);
            let v = pareto_samples(alpha, samples, rng.random());
            let h = build_distribution(&WealthSample::new(&v).unwrap(), DEFAULT_BINS).unwrap();
            let res = classify(&h, &RECOVERY_FIT);
            let err = res.powerlaw_fit.map_or(f64::INFINITY, |f| (f.exponent - alpha).abs() / alpha);
            worst.1 = worst.1.max(err);
            pareto_ok += usize::from(res.regime == Regime::Pareto && err <= 0.1);
        }
        let need = (trials * 95).div_ceil(100);
        (
            bg_ok >= need && pareto_ok >= need,
            format!(
                "exponential {bg_ok}/{trials} (worst error {:.1}%), Pareto {pareto_ok}/{trials} (worst error {:.1}%)",
                100.0 * worst.0,
                100.0 * worst.1
            ),
        )
    })
}

/// Every check at full size.
pub fn run_all(seed: u64) -> Report {
    Report {
        checks: vec![
            gini_oracle(200, seed),
            statistic_identities(),
            map_correctness(100, seed),
            fit_recovery(100, 100_000, seed),
        ],
    }
}
