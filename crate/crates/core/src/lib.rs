//! Deterministic coupled-map lattice model of wealth dynamics.
//!
//! Each agent on a periodic ring or square lattice updates synchronously as
//! `x' = r x exp(-|x - a psi|)`, where `psi` is the mean wealth of its
//! neighbors. The crate evolves such lattices, measures mean field,
//! dispersion and Gini coefficient, classifies the pooled wealth histogram
//! as exponential (Boltzmann-Gibbs) or power law (Pareto), and sweeps the
//! `(a, r)` plane.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar for the common cases.

pub mod error;
pub mod fit;
pub mod lattice;
pub mod output;
pub mod scalar;
pub mod seed;
pub mod selftest;
pub mod stats;
pub mod sweep;
pub mod synthetic;

pub use error::{Error, Result};
pub use fit::{classify, FitOptions, FitResult, Regime, RegimeResult};
pub use lattice::{init_state, Dims, LatticeState, ModelParams, Simulation, Topology};
pub use scalar::Real;
pub use stats::{gini, mean_field, std_dev, WealthSample};
pub use sweep::{Analysis, CellResult, Engine, SamplingProtocol, SweepGrid, SweepResults};

pub type Lattice = LatticeState<f64>;
pub type Lattice32 = LatticeState<f32>;
pub type Params = ModelParams<f64>;
pub type Params32 = ModelParams<f32>;
pub type Histogram = fit::Histogram<f64>;
pub type Histogram32 = fit::Histogram<f32>;
