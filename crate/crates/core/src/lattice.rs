//! Lattice state and the synchronous coupled-map update.
//!
//! Every site evolves as `x' = r * x * exp(-|x - a * psi|)` where `psi` is the
//! mean of the site's neighbors at the current iteration. All sites are
//! updated from the same input field (double buffering), and neighbor indices
//! wrap around periodically.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Identity of the generator used by [`init_state`], recorded in run metadata.
pub const GENERATOR_ID: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64), uniform = low + (high - low) * u53";

/// Sums adjacent pairs recursively, so `n` equal values add up to exactly
/// `n * v` when `n` is a power of two.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    match values {
        [] => T::zero(),
        [v] => *v,
        _ => {
            let (lo, hi) = values.split_at(values.len() / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Homogeneous model parameters: growth capacity `r` and coupling `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    r: T,
    a: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(r: T, a: T) -> Result<Self> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::Config(format!("r must be positive and finite, got {r}")));
        }
        if !(a >= T::zero()) || !a.is_finite() {
            return Err(Error::Config(format!("a must be non-negative and finite, got {a}")));
        }
        Ok(Self { r, a })
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn a(&self) -> T {
        self.a
    }

    /// One application of the local map for a site with value `x` and field `psi`.
    #[inline]
    pub fn map(&self, x: T, psi: T) -> T {
        self.r * x * (-(x - self.a * psi).abs()).exp()
    }
}

/// Neighborhood scheme. All variants use periodic boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topology {
    /// 1D ring, two nearest neighbors.
    Ring1D,
    /// Square lattice, 4 orthogonal neighbors.
    VonNeumann4,
    /// Square lattice, 4 orthogonal and 4 diagonal neighbors.
    Moore8,
}

const RING_OFFSETS: [(isize, isize); 2] = [(0, -1), (0, 1)];
const VON_NEUMANN_OFFSETS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
const MOORE_OFFSETS: [(isize, isize); 8] = [
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::Ring1D, Topology::VonNeumann4, Topology::Moore8];

    /// Cardinality of the neighbor set (2, 4 or 8).
    pub fn neighbor_count(self) -> usize {
        self.offsets().len()
    }

    /// Neighbor offsets as `(row, column)` deltas, in summation order.
    /// The ring uses only the column axis.
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Topology::Ring1D => &RING_OFFSETS,
            Topology::VonNeumann4 => &VON_NEUMANN_OFFSETS,
            Topology::Moore8 => &MOORE_OFFSETS,
        }
    }

    pub fn is_square(self) -> bool {
        !matches!(self, Topology::Ring1D)
    }

    pub fn name(self) -> &'static str {
        match self {
            Topology::Ring1D => "ring",
            Topology::VonNeumann4 => "von-neumann",
            Topology::Moore8 => "moore",
        }
    }

    /// Lattice shape with `side` sites per axis for this topology.
    ///
    /// The ring gets `side * side` sites so that every topology holds the
    /// same number of agents.
    pub fn dims_for_side(self, side: usize) -> Dims {
        match self {
            Topology::Ring1D => Dims::Ring(side * side),
            _ => Dims::Square(side),
        }
    }

    fn check_dims(self, dims: Dims) -> Result<()> {
        match (self, dims) {
            (Topology::Ring1D, Dims::Ring(_)) => Ok(()),
            (Topology::VonNeumann4 | Topology::Moore8, Dims::Square(_)) => Ok(()),
            _ => Err(Error::Config(format!(
                "topology {} is incompatible with {dims} lattice",
                self.name()
            ))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ring" | "ring1d" | "1d" => Ok(Topology::Ring1D),
            "von-neumann" | "vonneumann" | "von_neumann" | "vn" | "4" => Ok(Topology::VonNeumann4),
            "moore" | "8" => Ok(Topology::Moore8),
            other => Err(Error::Config(format!(
                "unknown topology `{other}` (expected ring, von-neumann or moore)"
            ))),
        }
    }
}

/// Lattice shape: a ring of `L` sites or an `L x L` torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dims {
    Ring(usize),
    Square(usize),
}

impl Dims {
    pub const MIN_SIDE: usize = 3;

    pub fn side(self) -> usize {
        match self {
            Dims::Ring(l) | Dims::Square(l) => l,
        }
    }

    pub fn site_count(self) -> usize {
        match self {
            Dims::Ring(l) => l,
            Dims::Square(l) => l * l,
        }
    }

    pub fn validate(self) -> Result<()> {
        if self.side() < Self::MIN_SIDE {
            return Err(Error::Config(format!(
                "lattice side must be at least {}, got {}",
                Self::MIN_SIDE,
                self.side()
            )));
        }
        Ok(())
    }

    /// Row/column of a flat site index. Ring sites live on row 0.
    fn coords(self, site: usize) -> (usize, usize) {
        match self {
            Dims::Ring(_) => (0, site),
            Dims::Square(l) => (site / l, site % l),
        }
    }

    fn wrapped(self, (row, col): (usize, usize), (dr, dc): (isize, isize)) -> usize {
        let l = self.side() as isize;
        let wrap = |v: usize, d: isize| (v as isize + d).rem_euclid(l) as usize;
        match self {
            Dims::Ring(_) => wrap(col, dc),
            Dims::Square(side) => wrap(row, dr) * side + wrap(col, dc),
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dims::Ring(l) => write!(f, "{l}"),
            Dims::Square(l) => write!(f, "{l}x{l}"),
        }
    }
}

impl FromStr for Dims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed dims `{s}`"));
        let dims = match s.split_once('x') {
            Some((rows, cols)) => {
                let rows: usize = rows.parse().map_err(|_| bad())?;
                let cols: usize = cols.parse().map_err(|_| bad())?;
                if rows != cols {
                    return Err(Error::Config(format!("only square lattices are supported, got {s}")));
                }
                Dims::Square(rows)
            }
            None => Dims::Ring(s.parse().map_err(|_| bad())?),
        };
        dims.validate()?;
        Ok(dims)
    }
}

/// Wealth field over all sites at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState<T> {
    dims: Dims,
    values: Vec<T>,
    time: u64,
}

/// Draws every site uniformly from `[low, high]` using a generator fully
/// determined by `seed`.
pub fn init_state<T: Real>(dims: Dims, seed: u64, low: f64, high: f64) -> Result<LatticeState<T>> {
    dims.validate()?;
    if !(low >= 0.0) || !(low < high) || !high.is_finite() {
        return Err(Error::Config(format!(
            "initial interval must satisfy 0 <= low < high, got [{low}, {high}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = high - low;
    let values = (0..dims.site_count())
        .map(|_| T::of(low + span * rng.random::<f64>()))
        .collect();
    Ok(LatticeState { dims, values, time: 0 })
}

impl<T: Real> LatticeState<T> {
    /// Wraps existing values. Fails on a size mismatch or negative/non-finite values.
    pub fn from_values(dims: Dims, values: Vec<T>, time: u64) -> Result<Self> {
        dims.validate()?;
        if values.len() != dims.site_count() {
            return Err(Error::Config(format!(
                "{dims} lattice needs {} values, got {}",
                dims.site_count(),
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= T::zero()) || !v.is_finite())
        {
            return Err(Error::Config(format!("site {i} has invalid wealth {v}")));
        }
        Ok(Self { dims, values, time })
    }

    pub fn uniform(dims: Dims, value: T) -> Result<Self> {
        Self::from_values(dims, vec![value; dims.site_count()], 0)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Mean of the neighbor values of `site`.
    pub fn local_field(&self, topology: Topology, site: usize) -> Result<T> {
        topology.check_dims(self.dims)?;
        if site >= self.values.len() {
            return Err(Error::Config(format!(
                "site {site} out of range for {} lattice",
                self.dims
            )));
        }
        let here = self.dims.coords(site);
        let mut neighbors = [T::zero(); 8];
        for (slot, &off) in neighbors.iter_mut().zip(topology.offsets()) {
            *slot = self.values[self.dims.wrapped(here, off)];
        }
        let eta = topology.neighbor_count();
        Ok(pairwise_sum(&neighbors[..eta]) / T::of_usize(eta))
    }

    /// One synchronous update. The input state is left untouched.
    pub fn step(&self, params: &ModelParams<T>, topology: Topology) -> Result<Self> {
        let mut out = Self {
            dims: self.dims,
            values: vec![T::zero(); self.values.len()],
            time: self.time,
        };
        self.step_into(params, topology, &mut out)?;
        Ok(out)
    }

    /// Writes the next iteration into `out`, reusing its buffer.
    pub fn step_into(&self, params: &ModelParams<T>, topology: Topology, out: &mut Self) -> Result<()> {
        topology.check_dims(self.dims)?;
        out.dims = self.dims;
        out.time = self.time + 1;
        out.values.resize(self.values.len(), T::zero());
        let x = &self.values;
        let next = &mut out.values;

        match (topology, self.dims) {
            (Topology::Ring1D, Dims::Ring(n)) => {
                let two = T::of(2.0);
                for i in 0..n {
                    let left = x[if i == 0 { n - 1 } else { i - 1 }];
                    let right = x[if i + 1 == n { 0 } else { i + 1 }];
                    next[i] = params.map(x[i], (left + right) / two);
                }
            }
            (Topology::VonNeumann4 | Topology::Moore8, Dims::Square(l)) => {
                let moore = topology == Topology::Moore8;
                let eta = T::of_usize(topology.neighbor_count());
                for i in 0..l {
                    let up = &x[((i + l - 1) % l) * l..][..l];
                    let mid = &x[i * l..][..l];
                    let down = &x[((i + 1) % l) * l..][..l];
                    let row = &mut next[i * l..][..l];
                    for j in 0..l {
                        let jl = if j == 0 { l - 1 } else { j - 1 };
                        let jr = if j + 1 == l { 0 } else { j + 1 };
                        // same association as pairwise_sum over the offset order
                        let mut sum = (up[j] + down[j]) + (mid[jl] + mid[jr]);
                        if moore {
                            sum = sum + ((up[jl] + up[jr]) + (down[jl] + down[jr]));
                        }
                        row[j] = params.map(mid[j], sum / eta);
                    }
                }
            }
            _ => unreachable!("dims checked above"),
        }

        match next.iter().position(|v| !v.is_finite()) {
            Some(site) => Err(Error::Overflow {
                time: out.time,
                site,
                value: next[site].to_f64_lossy(),
            }),
            None => Ok(()),
        }
    }

    /// `n` successive steps; `n = 0` returns a copy.
    pub fn evolve(&self, params: &ModelParams<T>, topology: Topology, n: u64) -> Result<Self> {
        let mut sim = Simulation::new(self.clone(), *params, topology)?;
        sim.advance_by(n)?;
        Ok(sim.into_state())
    }

    /// The lattice cyclically shifted by `(rows, cols)`; the ring ignores `rows`.
    pub fn cyclic_shift(&self, rows: isize, cols: isize) -> Self {
        let mut values = vec![T::zero(); self.values.len()];
        for (site, v) in self.values.iter().enumerate() {
            let here = self.dims.coords(site);
            values[self.dims.wrapped(here, (rows, cols))] = *v;
        }
        Self { dims: self.dims, values, time: self.time }
    }

    /// Plain-text snapshot: one header line, then one line per lattice row
    /// with values in shortest round-trip decimal form.
    pub fn write_snapshot<W: Write>(
        &self,
        mut w: W,
        topology: Topology,
        params: &ModelParams<T>,
    ) -> io::Result<()> {
        writeln!(
            w,
            "# dims={} time={} topology={} r={} a={}",
            self.dims,
            self.time,
            topology,
            params.r(),
            params.a()
        )?;
        let width = match self.dims {
            Dims::Ring(n) => n,
            Dims::Square(l) => l,
        };
        for row in self.values.chunks(width) {
            let mut first = true;
            for v in row {
                if !first {
                    w.write_all(b" ")?;
                }
                write!(w, "{v}")?;
                first = false;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads back a snapshot written by [`LatticeState::write_snapshot`].
    pub fn read_snapshot<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let io_err = |e: io::Error| Error::Config(format!("snapshot read failed: {e}"));
        // metadata lines may precede the dims header
        let header = loop {
            let line = lines
                .next()
                .ok_or_else(|| Error::Config("snapshot has no dims header".into()))?
                .map_err(io_err)?;
            if line.starts_with('#') && line.contains("dims=") {
                break line;
            }
        };
        let field = |key: &str| {
            header
                .trim_start_matches('#')
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .ok_or_else(|| Error::Config(format!("snapshot header lacks `{key}`")))
        };
        let dims: Dims = field("dims")?.parse()?;
        let time: u64 = field("time")?
            .parse()
            .map_err(|_| Error::Config("bad snapshot time".into()))?;
        let mut values = Vec::with_capacity(dims.site_count());
        for line in lines {
            for tok in line.map_err(io_err)?.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Config(format!("bad snapshot value `{tok}`")))?;
                values.push(T::of(v));
            }
        }
        Self::from_values(dims, values, time)
    }
}

/// Double-buffered evolution of one lattice.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    current: LatticeState<T>,
    scratch: LatticeState<T>,
    params: ModelParams<T>,
    topology: Topology,
}

impl<T: Real> Simulation<T> {
    pub fn new(state: LatticeState<T>, params: ModelParams<T>, topology: Topology) -> Result<Self> {
        topology.check_dims(state.dims)?;
        let scratch = state.clone();
        Ok(Self { current: state, scratch, params, topology })
    }

    pub fn state(&self) -> &LatticeState<T> {
        &self.current
    }

    pub fn into_state(self) -> LatticeState<T> {
        self.current
    }

    pub fn advance(&mut self) -> Result<&LatticeState<T>> {
        self.current.step_into(&self.params, self.topology, &mut self.scratch)?;
        std::mem::swap(&mut self.current, &mut self.scratch);
        Ok(&self.current)
    }

    pub fn advance_by(&mut self, n: u64) -> Result<&LatticeState<T>> {
        for _ in 0..n {
            self.advance()?;
        }
        Ok(&self.current)
    }
}
