//! Sampling protocol per `(a, r)` cell, parameter-plane sweeps, topology
//! transition masks and Gini-versus-`a` curves.
//!
//! A cell runs `realizations` independent lattices. Each discards `transient`
//! iterations and then records `window` snapshots. Snapshots from every
//! realization are pooled into one histogram for classification, and the
//! scalar observables are averaged over all snapshots with equal weight.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{classify, FitOptions, HistogramBuilder, Regime, DEFAULT_BINS, MIN_BINS};
use crate::lattice::{init_state, ModelParams, Simulation, Topology};
use crate::scalar::Real;
use crate::seed::{child_seed, MAX_AXIS_INDEX, MAX_REALIZATION};
use crate::stats::{gini, mean_field, std_dev, WealthSample};

/// Default for [`Engine::pool_limit`].
pub const POOL_LIMIT: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingProtocol {
    /// Sites per axis; rings get `side * side` sites.
    pub lattice_side: usize,
    pub transient: u64,
    pub window: u64,
    pub realizations: u32,
    pub master_seed: u64,
    pub init_low: f64,
    pub init_high: f64,
}

impl SamplingProtocol {
    /// Laptop-sized defaults that keep the qualitative phase structure.
    pub const fn desk() -> Self {
        Self {
            lattice_side: 64,
            transient: 2_000,
            window: 50,
            realizations: 10,
            master_seed: 1,
            init_low: 1.0,
            init_high: 100.0,
        }
    }

    /// 316 x 316 lattice, 10^4 transient, 100 windowed iterations, 100 realizations.
    pub const fn full_scale() -> Self {
        Self {
            lattice_side: 316,
            transient: 10_000,
            window: 100,
            realizations: 100,
            ..Self::desk()
        }
    }

    /// Checks the fields needed to evolve a single lattice.
    pub fn validate(&self) -> Result<()> {
        if self.lattice_side < 3 {
            return Err(Error::Config(format!("lattice_side must be >= 3, got {}", self.lattice_side)));
        }
        if !(self.init_low >= 0.0) || !(self.init_low < self.init_high) || !self.init_high.is_finite() {
            return Err(Error::Config(format!(
                "init_low/init_high must satisfy 0 <= init_low < init_high, got [{}, {}]",
                self.init_low, self.init_high
            )));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the requirements of cell sampling.
    pub fn validate_sampling(&self) -> Result<()> {
        self.validate()?;
        if self.window == 0 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        if self.realizations == 0 || self.realizations - 1 > MAX_REALIZATION {
            return Err(Error::Config(format!(
                "realizations must be in 1..={}, got {}",
                u64::from(MAX_REALIZATION) + 1,
                self.realizations
            )));
        }
        Ok(())
    }
}

impl Default for SamplingProtocol {
    fn default() -> Self {
        Self::desk()
    }
}

impl fmt::Display for SamplingProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lattice_side={} transient={} window={} realizations={} master_seed={} init_low={} init_high={}",
            self.lattice_side,
            self.transient,
            self.window,
            self.realizations,
            self.master_seed,
            self.init_low,
            self.init_high
        )
    }
}

/// Rectangular `(a, r)` grid with inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub a_min: f64,
    pub a_max: f64,
    pub delta_a: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub delta_r: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            a_min: 0.0,
            a_max: 1.6,
            delta_a: 0.02,
            r_min: 2.0,
            r_max: 30.0,
            delta_r: 1.0,
        }
    }
}

fn axis(name: &str, min: f64, max: f64, delta: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Config(format!("delta_{name} must be positive, got {delta}")));
    }
    if !(min <= max) || !min.is_finite() || !max.is_finite() {
        return Err(Error::Config(format!("{name}_min must not exceed {name}_max, got [{min}, {max}]")));
    }
    let steps = ((max - min) / delta + 1e-9).floor();
    if steps > f64::from(MAX_AXIS_INDEX) {
        return Err(Error::Config(format!("{name} axis has more than {} points", MAX_AXIS_INDEX + 1)));
    }
    // computed from the index, then rounded to 12 decimals, so 0.02 * 3 prints as 0.06
    Ok((0..=steps as u64)
        .map(|i| ((min + i as f64 * delta) * 1e12).round() / 1e12)
        .collect())
}

impl SweepGrid {
    /// One-cell grid at `(a, r)`.
    pub fn single(a: f64, r: f64) -> Self {
        Self { a_min: a, a_max: a, delta_a: 1.0, r_min: r, r_max: r, delta_r: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.a_values()?;
        self.r_values()?;
        if self.a_min < 0.0 {
            return Err(Error::Config(format!("a_min must be >= 0, got {}", self.a_min)));
        }
        if self.r_min <= 0.0 {
            return Err(Error::Config(format!("r_min must be > 0, got {}", self.r_min)));
        }
        Ok(())
    }

    pub fn a_values(&self) -> Result<Vec<f64>> {
        axis("a", self.a_min, self.a_max, self.delta_a)
    }

    pub fn r_values(&self) -> Result<Vec<f64>> {
        axis("r", self.r_min, self.r_max, self.delta_r)
    }
}

impl fmt::Display for SweepGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a_min={} a_max={} delta_a={} r_min={} r_max={} delta_r={}",
            self.a_min, self.a_max, self.delta_a, self.r_min, self.r_max, self.delta_r
        )
    }
}

/// Histogram and classification settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub bins: usize,
    pub fit: FitOptions,
}

impl Default for Analysis {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, fit: FitOptions::default() }
    }
}

impl Analysis {
    pub fn validate(&self) -> Result<()> {
        if self.bins < MIN_BINS {
            return Err(Error::Config(format!("bins must be >= {MIN_BINS}, got {}", self.bins)));
        }
        if !(0.0..=1.0).contains(&self.fit.threshold) {
            return Err(Error::Config(format!("threshold must lie in [0, 1], got {}", self.fit.threshold)));
        }
        Ok(())
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bins={} threshold={} min_bin_count={} powerlaw_min_x={}",
            self.bins,
            self.fit.threshold,
            self.fit.min_bin_count,
            self.fit.powerlaw_min_x.map_or_else(|| "none".to_string(), |x| x.to_string())
        )
    }
}

/// Position of a cell on its grid; part of the seed derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellIndex {
    pub a: u32,
    pub r: u32,
}

/// Scalar observables of a cell, averaged over every windowed snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub mean_field: f64,
    pub sigma: f64,
    pub gini: f64,
    /// Standard error of the per-realization mean Gini.
    pub gini_stderr: f64,
    /// Mean field at the last windowed iteration, averaged over realizations.
    pub final_mean_field: f64,
    /// Gini at the last windowed iteration, averaged over realizations.
    pub final_gini: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    /// Both families passed the gate; the better-correlated one won by `margin`.
    Overlap { margin: f64 },
    Failed(String),
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Ok => f.write_str("ok"),
            CellStatus::Overlap { margin } => write!(f, "overlap(margin={margin})"),
            CellStatus::Failed(why) => write!(f, "failed({why})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub a: f64,
    pub r: f64,
    pub index: CellIndex,
    pub topology: Topology,
    pub regime: Regime,
    /// Exponent of the assigned family (or of the better fit when unclassified).
    pub exponent: Option<f64>,
    pub correlation: Option<f64>,
    /// Exponential-fit exponent, whenever that fit was computable.
    pub mu: Option<f64>,
    /// Power-law-fit exponent, whenever that fit was computable.
    pub alpha: Option<f64>,
    pub stats: Option<CellStats>,
    pub status: CellStatus,
}

impl CellResult {
    fn failed(a: f64, r: f64, index: CellIndex, topology: Topology, why: String) -> Self {
        Self {
            a,
            r,
            index,
            topology,
            regime: Regime::Unclassified,
            exponent: None,
            correlation: None,
            mu: None,
            alpha: None,
            stats: None,
            status: CellStatus::Failed(why),
        }
    }

    pub fn gini(&self) -> Option<f64> {
        self.stats.map(|s| s.gini)
    }

    pub fn is_failed(&self) -> bool {
        matches!(self.status, CellStatus::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResults {
    pub grid: SweepGrid,
    pub topology: Topology,
    /// Row-major: `r` outer, `a` inner.
    pub cells: Vec<CellResult>,
}

impl SweepResults {
    pub fn regimes(&self) -> impl Iterator<Item = Regime> + '_ {
        self.cells.iter().map(|c| c.regime)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskCell {
    pub a: f64,
    pub r: f64,
    pub flag: bool,
}

/// Cells where the source topology is Pareto and the target is Boltzmann-Gibbs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMask {
    pub grid: SweepGrid,
    pub source: Topology,
    pub target: Topology,
    pub cells: Vec<MaskCell>,
}

impl TransitionMask {
    pub fn flagged_count(&self) -> usize {
        self.cells.iter().filter(|c| c.flag).count()
    }
}

pub fn transition_mask(source: &SweepResults, target: &SweepResults) -> Result<TransitionMask> {
    if source.grid != target.grid || source.cells.len() != target.cells.len() {
        return Err(Error::Config(format!(
            "sweeps are on different grids: [{}] vs [{}]",
            source.grid, target.grid
        )));
    }
    let cells = source
        .cells
        .iter()
        .zip(&target.cells)
        .map(|(s, t)| MaskCell {
            a: s.a,
            r: s.r,
            flag: s.regime == Regime::Pareto && t.regime == Regime::BoltzmannGibbs,
        })
        .collect();
    Ok(TransitionMask {
        grid: source.grid,
        source: source.topology,
        target: target.topology,
        cells,
    })
}

/// Gini against `a` at fixed `r`, one curve per topology.
#[derive(Debug, Clone, PartialEq)]
pub struct GiniCurves {
    pub r: f64,
    pub a_values: Vec<f64>,
    pub topologies: Vec<Topology>,
    /// `cells[t][i]` is topology `t` at `a_values[i]`.
    pub cells: Vec<Vec<CellResult>>,
}

impl GiniCurves {
    pub fn curve(&self, topology: Topology) -> Option<&[CellResult]> {
        self.topologies
            .iter()
            .position(|&t| t == topology)
            .map(|i| self.cells[i].as_slice())
    }
}

/// Runs cells under one protocol and analysis setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engine {
    pub protocol: SamplingProtocol,
    pub analysis: Analysis,
    /// Worker threads for sweeps; `0` uses every available processor.
    pub workers: usize,
    /// Largest pooled sample held in memory; bigger pools are histogrammed
    /// by replaying the realizations.
    pub pool_limit: usize,
}

impl Engine {
    pub fn new(protocol: SamplingProtocol, analysis: Analysis) -> Self {
        Self { protocol, analysis, workers: 0, pool_limit: POOL_LIMIT }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Evaluates one `(a, r)` cell. Numeric failures are reported in the
    /// returned cell; only invalid parameters or protocol produce an error.
    pub fn evaluate_cell<T: Real>(&self, a: f64, r: f64, index: CellIndex, topology: Topology) -> Result<CellResult> {
        self.protocol.validate_sampling()?;
        self.analysis.validate()?;
        let params = ModelParams::new(T::of(r), T::of(a))?;
        child_seed(self.protocol.master_seed, index.a, index.r, 0)?;
        match self.run_cell::<T>(params, index, topology) {
            Ok(mut cell) => {
                cell.a = a;
                cell.r = r;
                Ok(cell)
            }
            Err(e @ Error::Config(_)) => Err(e),
            Err(e) => Ok(CellResult::failed(a, r, index, topology, e.to_string())),
        }
    }

    fn realization<T: Real>(
        &self,
        params: ModelParams<T>,
        index: CellIndex,
        topology: Topology,
        rho: u32,
    ) -> Result<Simulation<T>> {
        let p = &self.protocol;
        let seed = child_seed(p.master_seed, index.a, index.r, rho)?;
        let state = init_state::<T>(topology.dims_for_side(p.lattice_side), seed, p.init_low, p.init_high)?;
        let mut sim = Simulation::new(state, params, topology)?;
        sim.advance_by(p.transient)?;
        Ok(sim)
    }

    fn run_cell<T: Real>(&self, params: ModelParams<T>, index: CellIndex, topology: Topology) -> Result<CellResult> {
        let p = &self.protocol;
        let sites = topology.dims_for_side(p.lattice_side).site_count();
        let pooled = p.realizations as usize * p.window as usize * sites;
        let keep_pool = pooled <= self.pool_limit;
        let mut pool: Vec<T> = Vec::with_capacity(if keep_pool { pooled } else { 0 });

        let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
        let (mut sum_h, mut sum_sigma, mut sum_g) = (0.0, 0.0, 0.0);
        let (mut final_h, mut final_g) = (0.0, 0.0);
        let mut per_realization_g = Vec::with_capacity(p.realizations as usize);

        for rho in 0..p.realizations {
            let mut sim = self.realization(params, index, topology, rho)?;
            let mut g_here = 0.0;
            for w in 0..p.window {
                let snapshot = sim.advance()?.values();
                let sample = WealthSample::new(snapshot)?;
                let h = mean_field(&sample).to_f64_lossy();
                let g = gini(&sample)?.to_f64_lossy();
                sum_h += h;
                sum_sigma += std_dev(&sample).to_f64_lossy();
                sum_g += g;
                g_here += g;
                if w + 1 == p.window {
                    final_h += h;
                    final_g += g;
                }
                for &v in snapshot {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if keep_pool {
                    pool.extend_from_slice(snapshot);
                }
            }
            per_realization_g.push(g_here / p.window as f64);
        }

        let snapshots = (p.realizations as u64 * p.window) as f64;
        let reals = f64::from(p.realizations);
        let stats = CellStats {
            mean_field: sum_h / snapshots,
            sigma: sum_sigma / snapshots,
            gini: sum_g / snapshots,
            gini_stderr: standard_error(&per_realization_g),
            final_mean_field: final_h / reals,
            final_gini: final_g / reals,
        };

        let mut cell = CellResult {
            a: 0.0,
            r: 0.0,
            index,
            topology,
            regime: Regime::Unclassified,
            exponent: None,
            correlation: None,
            mu: None,
            alpha: None,
            stats: Some(stats),
            status: CellStatus::Ok,
        };

        let mut builder = match HistogramBuilder::new(lo, hi, self.analysis.bins, pooled) {
            Ok(b) => b,
            Err(e) => {
                cell.status = CellStatus::Failed(e.to_string());
                return Ok(cell);
            }
        };
        if keep_pool {
            builder.add(&pool);
        } else {
            for rho in 0..p.realizations {
                let mut sim = self.realization(params, index, topology, rho)?;
                for _ in 0..p.window {
                    builder.add(sim.advance()?.values());
                }
            }
        }
        let result = classify(&builder.finish(), &self.analysis.fit);

        cell.regime = result.regime;
        cell.mu = result.exponential_fit.map(|f| f.exponent.to_f64_lossy());
        cell.alpha = result.powerlaw_fit.map(|f| f.exponent.to_f64_lossy());
        if let Some(fit) = result.reported_fit() {
            cell.exponent = Some(fit.exponent.to_f64_lossy());
            cell.correlation = Some(fit.correlation.to_f64_lossy());
        }
        if let Some(margin) = result.overlap_margin {
            cell.status = CellStatus::Overlap { margin: margin.to_f64_lossy() };
        }
        Ok(cell)
    }

    fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
    }

    /// Evaluates every grid cell; results are ordered `r` outer, `a` inner
    /// whatever order the workers finish in.
    pub fn sweep<T: Real>(&self, grid: &SweepGrid, topology: Topology) -> Result<SweepResults> {
        grid.validate()?;
        self.protocol.validate_sampling()?;
        let a_values = grid.a_values()?;
        let r_values = grid.r_values()?;
        let jobs: Vec<(CellIndex, f64, f64)> = r_values
            .iter()
            .enumerate()
            .flat_map(|(ir, &r)| {
                a_values
                    .iter()
                    .enumerate()
                    .map(move |(ia, &a)| (CellIndex { a: ia as u32, r: ir as u32 }, a, r))
            })
            .collect();
        let cells = self.run_jobs::<T>(&jobs, topology)?;
        Ok(SweepResults { grid: *grid, topology, cells })
    }

    fn run_jobs<T: Real>(&self, jobs: &[(CellIndex, f64, f64)], topology: Topology) -> Result<Vec<CellResult>> {
        self.thread_pool()?.install(|| {
            jobs.par_iter()
                .map(|&(index, a, r)| self.evaluate_cell::<T>(a, r, index, topology))
                .collect()
        })
    }

    /// Averaged Gini at each `a` (indexed by position) for every topology, at fixed `r`.
    pub fn gini_vs_a<T: Real>(&self, a_values: &[f64], r: f64, topologies: &[Topology]) -> Result<GiniCurves> {
        if a_values.is_empty() || topologies.is_empty() {
            return Err(Error::Config("gini curves need at least one a value and one topology".into()));
        }
        if a_values.len() > MAX_AXIS_INDEX as usize + 1 {
            return Err(Error::Config("too many a values".into()));
        }
        let jobs: Vec<(CellIndex, f64, f64)> = a_values
            .iter()
            .enumerate()
            .map(|(i, &a)| (CellIndex { a: i as u32, r: 0 }, a, r))
            .collect();
        let cells = topologies
            .iter()
            .map(|&t| self.run_jobs::<T>(&jobs, t))
            .collect::<Result<_>>()?;
        Ok(GiniCurves {
            r,
            a_values: a_values.to_vec(),
            topologies: topologies.to_vec(),
            cells,
        })
    }
}

fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Engine {
        Engine::new(
            SamplingProtocol {
                lattice_side: 8,
                transient: 50,
                window: 4,
                realizations: 2,
                master_seed: 5,
                init_low: 1.0,
                init_high: 100.0,
            },
            Analysis { bins: 20, ..Analysis::default() },
        )
        .with_workers(1)
    }

    #[test]
    fn grid_axes() {
        let g = SweepGrid { a_min: 0.0, a_max: 1.6, delta_a: 0.02, r_min: 2.0, r_max: 30.0, delta_r: 1.0 };
        let a = g.a_values().unwrap();
        assert_eq!(a.len(), 81);
        assert_eq!(a[3], 0.06);
        assert_eq!(a[80], 1.6);
        assert_eq!(g.r_values().unwrap().len(), 29);
        assert_eq!(SweepGrid::single(0.5, 10.0).a_values().unwrap(), vec![0.5]);
    }

    #[test]
    fn grid_rejects_bad_steps() {
        let bad = SweepGrid { delta_a: 0.0, ..SweepGrid::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("delta_a"));
        let bad = SweepGrid { r_min: 5.0, r_max: 4.0, ..SweepGrid::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("r_min"));
        let bad = SweepGrid { r_min: 0.0, ..SweepGrid::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn protocol_validation() {
        assert!(SamplingProtocol::desk().validate_sampling().is_ok());
        let p = SamplingProtocol { window: 0, ..SamplingProtocol::desk() };
        assert!(p.validate().is_ok());
        assert!(p.validate_sampling().is_err());
        assert!(SamplingProtocol { realizations: 0, ..p }.validate_sampling().is_err());
        assert!(SamplingProtocol { lattice_side: 2, ..p }.validate().is_err());
        let full = SamplingProtocol::full_scale();
        assert_eq!((full.lattice_side, full.transient, full.window, full.realizations), (316, 10_000, 100, 100));
    }

    #[test]
    fn cell_is_deterministic() {
        let e = tiny();
        let idx = CellIndex { a: 3, r: 1 };
        let c1 = e.evaluate_cell::<f64>(0.5, 10.0, idx, Topology::Moore8).unwrap();
        let c2 = e.evaluate_cell::<f64>(0.5, 10.0, idx, Topology::Moore8).unwrap();
        assert_eq!(c1, c2);
        let s = c1.stats.unwrap();
        assert!(s.mean_field > 0.0 && s.sigma >= 0.0 && (0.0..1.0).contains(&s.gini));
        let other = e.evaluate_cell::<f64>(0.5, 10.0, CellIndex { a: 4, r: 1 }, Topology::Moore8).unwrap();
        assert_ne!(c1.stats, other.stats);
    }

    #[test]
    fn single_cell_sweep_matches_cell() {
        let e = tiny();
        let s = e.sweep::<f64>(&SweepGrid::single(0.4, 8.0), Topology::VonNeumann4).unwrap();
        assert_eq!(s.cells.len(), 1);
        let c = e.evaluate_cell::<f64>(0.4, 8.0, CellIndex { a: 0, r: 0 }, Topology::VonNeumann4).unwrap();
        assert_eq!(s.cells[0], c);
    }

    #[test]
    fn sweep_order_and_worker_independence() {
        let grid = SweepGrid { a_min: 0.2, a_max: 0.6, delta_a: 0.2, r_min: 5.0, r_max: 6.0, delta_r: 1.0 };
        let one = tiny().sweep::<f64>(&grid, Topology::Ring1D).unwrap();
        let many = tiny().with_workers(3).sweep::<f64>(&grid, Topology::Ring1D).unwrap();
        assert_eq!(one, many);
        let coords: Vec<(f64, f64)> = one.cells.iter().map(|c| (c.r, c.a)).collect();
        assert_eq!(coords, vec![(5.0, 0.2), (5.0, 0.4), (5.0, 0.6), (6.0, 0.2), (6.0, 0.4), (6.0, 0.6)]);
        // each cell equals a lone evaluation at its index: evaluation order is irrelevant
        for c in one.cells.iter().rev() {
            assert_eq!(&tiny().evaluate_cell::<f64>(c.a, c.r, c.index, Topology::Ring1D).unwrap(), c);
        }
    }

    #[test]
    fn overflow_marks_cell_failed() {
        // r * x leaves the f32 range on the first step
        let e = Engine::new(
            SamplingProtocol { lattice_side: 4, init_low: 1.0, init_high: 2.0, ..tiny().protocol },
            Analysis::default(),
        );
        let c = e.evaluate_cell::<f32>(0.0, 3e38, CellIndex { a: 0, r: 0 }, Topology::Moore8).unwrap();
        assert!(c.is_failed());
        assert!(c.status.to_string().starts_with("failed(numeric overflow"), "{}", c.status);
        assert_eq!(c.regime, Regime::Unclassified);
        assert!(c.stats.is_none());
    }

    #[test]
    fn invalid_parameters_are_errors() {
        let e = tiny();
        assert!(e.evaluate_cell::<f64>(-0.1, 10.0, CellIndex { a: 0, r: 0 }, Topology::Moore8).is_err());
        assert!(e.evaluate_cell::<f64>(0.1, 0.0, CellIndex { a: 0, r: 0 }, Topology::Moore8).is_err());
    }

    #[test]
    fn replayed_histogram_matches_pool() {
        let e = tiny();
        let replay = Engine { pool_limit: 0, ..e };
        for a in [0.3, 0.9] {
            let idx = CellIndex { a: 1, r: 2 };
            assert_eq!(
                e.evaluate_cell::<f64>(a, 10.0, idx, Topology::Moore8).unwrap(),
                replay.evaluate_cell::<f64>(a, 10.0, idx, Topology::Moore8).unwrap()
            );
        }
    }

    #[test]
    fn mask_flags() {
        let e = tiny();
        let grid = SweepGrid { a_min: 0.2, a_max: 0.4, delta_a: 0.2, r_min: 6.0, r_max: 6.0, delta_r: 1.0 };
        let s = e.sweep::<f64>(&grid, Topology::Moore8).unwrap();
        let same = transition_mask(&s, &s).unwrap();
        assert_eq!(same.flagged_count(), 0);

        let mut src = s.clone();
        let mut dst = s.clone();
        src.cells.iter_mut().for_each(|c| c.regime = Regime::Pareto);
        dst.cells.iter_mut().for_each(|c| c.regime = Regime::BoltzmannGibbs);
        assert_eq!(transition_mask(&src, &dst).unwrap().flagged_count(), 2);
        assert_eq!(transition_mask(&dst, &src).unwrap().flagged_count(), 0);

        let other = e.sweep::<f64>(&SweepGrid::single(0.2, 6.0), Topology::Moore8).unwrap();
        assert!(matches!(transition_mask(&s, &other), Err(Error::Config(_))));
    }

    #[test]
    fn curves_single_point() {
        let e = tiny();
        let curves = e.gini_vs_a::<f64>(&[0.5], 10.0, &[Topology::VonNeumann4]).unwrap();
        let cell = e.evaluate_cell::<f64>(0.5, 10.0, CellIndex { a: 0, r: 0 }, Topology::VonNeumann4).unwrap();
        assert_eq!(curves.curve(Topology::VonNeumann4).unwrap()[0].gini(), cell.gini());
        assert!(curves.curve(Topology::Moore8).is_none());
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(standard_error(&[0.3, 0.3, 0.3]), 0.0);
        assert_eq!(standard_error(&[0.7]), 0.0);
        assert!((standard_error(&[1.0, 3.0]) - 1.0).abs() < 1e-15);
    }
}
