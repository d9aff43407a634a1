//! Numerical core for the one-dimensional nonlocal Fisher-KPP equation
//!
//! ```text
//! u_t = D u_xx + u (1 - φ * u),   φ = φ_T + φ̄
//! ```
//!
//! where `φ_T` is the unit top hat on `[-1/2, 1/2]` and `φ̄` an even,
//! zero-mean perturbation supported on the same interval.
//!
//! This crate is `no_std` (it needs `alloc`) and holds everything that does
//! not require an FFT or dense eigen-solver: kernel transforms, dispersion
//! relations and neutral curves, the cosine-potential Sturm-Liouville problem
//! and the reduced fixed-point equations of the small-perturbation theory.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod airy;
pub mod dispersion;
mod error;
pub mod kernel;
pub mod quad;
pub mod reduced;
pub mod roots;
pub mod sturm_liouville;

pub use error::{Error, Result};
pub use kernel::{KernelSpec, PerturbationKind};

/// π as used throughout.
pub(crate) const PI: f64 = core::f64::consts::PI;
