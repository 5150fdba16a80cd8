//! Phase-only compressed sensing (PO-CS).
//!
//! A signal `x` on the unit sphere is observed only through the phases
//! `z = sign(Φx)` of complex Gaussian measurements. Recovery linearizes the
//! phase constraints into a real system `A_z u = e1` and solves basis pursuit
//! over it, then normalizes. This crate provides:
//!
//! * [`signals`]: the sparse and low-rank ground-truth families,
//! * [`measurement`]: the complex Gaussian ensemble, phase extraction, the
//!   linearized system and its near-Gaussianity diagnostics,
//! * [`solvers`]: ADMM basis pursuit for the ℓ1 and nuclear norms plus the
//!   end-to-end PO-CS and linear-CS recovery pipelines,
//! * [`thresholds`]: closed-form, quadrature and Monte Carlo evaluation of
//!   the phase-transition locations for both sensing models,
//! * [`curves`]: the ratio curves `ζ̂_PO / ζ̂_LN` behind the comparison plots,
//! * [`experiments`]: reproducible Monte Carlo sweeps with logistic fits of
//!   the empirical transition,
//! * [`cli`]: the command-line front end used by the `pocs` binary.

pub mod cli;
pub mod curves;
pub mod error;
pub mod experiments;
pub mod io;
pub mod measurement;
pub mod plot;
pub mod quad;
pub mod rng;
pub mod signals;
pub mod solvers;
pub mod thresholds;

pub use error::{Error, Result};
