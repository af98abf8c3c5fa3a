//! File formats, parallel trials and the `moran` command-line tool for the
//! spatial Moran process implemented in `moran_core`.
//!
//! Commands:
//! - `exact`: fixation probabilities of every configuration, optionally
//!   averaged over an initial distribution, with per-level deviation from the
//!   classic Moran value.
//! - `simulate`: seeded Monte Carlo estimate, identical for any thread count.
//! - `sweep`: two-vertex closed form on a grid, as CSV.
//! - `verify`: builtin theorem suite or a descriptive report on a model.
//!
//! Every JSON output embeds a [`manifest::RunManifest`] and validates
//! against the schemas in `schemas/`.

pub mod cli;
pub mod error;
pub mod init;
pub mod manifest;
pub mod model_file;
pub mod parallel;
pub mod report;
pub mod verify;

pub use error::{CliError, CliResult};
