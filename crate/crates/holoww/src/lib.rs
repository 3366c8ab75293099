//! Pseudospectral solver for 2D infinite-depth gravity water waves in
//! holomorphic coordinates, with normal-form and wave-packet diagnostics.
//!
//! Module map:
//! - [`spectral`]: grids, FFTs, projections, fractional derivatives
//! - [`waterwave`]: the flow, its linear part and the Lawson RK4 stepper
//! - [`diagnostics`]: energies, norms, weighted energy
//! - [`normalform`]: normal form variables and cubic sources
//! - [`packets`]: wave packets, γ(t,v), σ and Ψ
//! - [`harness`]: config, experiments, oracles

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod normalform;
pub mod packets;
pub mod par;
pub mod spectral;
pub mod waterwave;

pub use error::{Error, Result};
