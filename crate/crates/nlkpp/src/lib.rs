//! Periodic steady states, continuation, stability and time evolution for the
//! nonlocal Fisher-KPP equation `u_t = D u_xx + u(1 − φ * u)`.

pub mod acceptance;
pub mod bifurcation;
pub mod cli;
pub mod config;
pub mod continuation;
pub mod dogleg;
pub mod error;
pub mod evolution;
pub mod fpp;
pub mod io;
pub mod spectral;
pub mod stability;
pub mod steady;

pub use error::{Error, Result};
