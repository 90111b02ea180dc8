//! File formats, configuration and command line for the `segseed_core`
//! segmentation engine.
//!
//! Rasters are binary PGM (`P5`, 8-bit), tabular results are CSV and run
//! parameters are plain `key=value` text.

pub mod cli;
pub mod config;
pub mod parallel;
pub mod pgm;

pub use cli::{main_with_args, CliError};
pub use pgm::{load_labels, load_pgm, save_labels, save_pgm};
