//! Command-line runs, CSV/JSON output and FFT checks for the matrix
//! Whittaker kernels of `whitkern-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod fft;
pub mod output;

pub use cli::run;
pub use config::{load_config, RunConfig};
pub use error::CliError;
