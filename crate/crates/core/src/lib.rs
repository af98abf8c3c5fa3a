//! Microscopic spatial Moran process on directed weighted graphs.
//!
//! A population of `n` individuals sits on the vertices of a strongly
//! connected digraph with row-stochastic weight matrix `W`. Each step a
//! vertex `v` is selected with probability proportional to `mu(v)` (scaled
//! by the fitness `r` when `v` holds a mutant) and its type is copied onto a
//! neighbour drawn from `W(v, .)`. Configurations are bitmasks over the
//! vertices; the all-zero and all-one masks are absorbing.
//!
//! The crate is `no_std` (with `alloc`). File formats, the command-line tool
//! and parallel trial execution live in the `moran` companion crate.
//!
//! Modules:
//! - [`graph`]: weight matrices, stationary distributions, configurations.
//! - [`dynamics`]: increase/decrease probabilities and the transition kernel.
//! - [`exact`]: fixation probabilities from the absorbing-chain linear system.
//! - [`montecarlo`]: reproducible trajectory sampling.
//! - [`analysis`]: martingale and ratio checks, lumpability, closed forms for
//!   the two-vertex model and the Galanis graph, parameter sweeps.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod dynamics;
mod error;
pub mod exact;
pub mod graph;
mod linalg;
pub mod montecarlo;

pub use dynamics::{MicSmpModel, StepDistribution, TransitionKernel};
pub use error::{Error, Result};
pub use exact::{FixationReport, InitialDistribution};
pub use graph::{Configuration, SelectionPolicy, StationaryDistribution, WeightMatrix};
pub use montecarlo::{SimulationMode, SimulationResult, TrajectoryConfig};
