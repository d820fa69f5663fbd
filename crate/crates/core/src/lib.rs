//! Matrix Whittaker kernels and the machinery needed to check them numerically.
//!
//! The crate is `no_std` with `alloc`. Everything that touches files, the
//! command line or FFTs lives in the `whitkern` companion crate.
//!
//! Module map:
//! - [`specfun`]: gamma, digamma, ₁F₁, ₀F₁, Whittaker W, Bessel J/I/K.
//! - [`params`]: the admissible (z, z′) family and σ.
//! - [`finite`]: finite J-symmetric determinantal processes.
//! - [`kernels`]: the four kernel blocks, auxiliary functions, C, D, A, B.
//! - [`lab`]: Nyström discretization and operator-identity checks.
//! - [`spectral`]: the eigenbasis f_{a,m}, transform identities, Plancherel.
//! - [`tail`]: the translation-invariant tail kernel and its symbol.
//! - [`limit`]: the Bessel/Macdonald scaling limit.

#![no_std]
#![forbid(unsafe_code)]
// negated comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod finite;
pub mod kernels;
pub mod lab;
pub mod limit;
pub mod params;
pub mod spectral;
pub mod specfun;
pub mod tail;

mod quad;

pub use num_complex::Complex64;

pub use kernels::{BlockTag, KernelMachine, Sign};
pub use params::{ParamError, ParameterSet};
pub use specfun::{AccuracyPolicy, SpecFunError};

/// Errors surfaced by the higher-level modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Finite(#[from] finite::FiniteError),
    #[error(transparent)]
    Lab(#[from] lab::LabError),
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("underflow: e^(-xi/C) = {0:e} is below the representable guard")]
    Underflow(f64),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
