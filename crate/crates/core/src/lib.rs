//! Pseudo-spectral simulation of the tamed incompressible Navier–Stokes
//! equation on the periodic box `[0, 2π)³`,
//!
//! ```text
//! ∂ₜu = νΔu − (u·∇)u + ∇p − g_N(|u|²) u + f,    div u = 0,
//! ```
//!
//! together with a diagnostics engine for energy budgets, Sobolev-norm growth
//! envelopes in the taming level `N`, activation measures and the localized
//! energy identity.
//!
//! Module map:
//! - [`spectral`]: Fourier representation, Leray projector, dealiasing, norms, checkpoints.
//! - [`taming`]: the smooth taming function `g_N` and its derivative.
//! - [`dynamics`]: nonlinear right-hand side and pressure recovery.
//! - [`integrator`]: integrating-factor RK4 time stepping and the run loop.
//! - [`diagnostics`]: per-sample records, run summaries and the bound checkers.
//! - [`scenarios`]: initial data and forcing.
//! - [`config`] / [`experiment`]: configuration parsing and experiment orchestration.

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod output;
pub mod scenarios;
pub mod spectral;
pub mod taming;

pub use error::{Error, Result};
