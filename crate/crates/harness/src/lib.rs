//! Datasets, experiment grids, plotting and the `sparsegen` command line.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod plot;
pub mod search;

pub use data::{load_idx, synthetic_glyphs, Dataset, Domain};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_grid, run_transfer, Algorithm, ExperimentGrid, ResultRow};
pub use plot::{plot, Metric};
