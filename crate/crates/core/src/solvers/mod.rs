//! Equality-constrained norm minimization (basis pursuit) and the two
//! recovery pipelines built on it.

pub mod admm;
pub mod polish;
pub mod prox;
mod recovery;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use prox::{Nuclear, L1};

pub use admm::AdmmSolution;
pub use recovery::{recover_linear_cs, recover_pocs, RecoveryOutcome};

/// ADMM parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Penalty parameter ρ.
    pub rho: f64,
    pub atol: f64,
    pub rtol: f64,
    pub max_iter: usize,
    /// Over-relaxation α ∈ [1, 1.9].
    pub over_relaxation: f64,
    /// Rebalance ρ when the primal and dual residuals drift apart.
    pub adaptive_rho: bool,
    /// Periodically try to certify the current support exactly (ℓ1 only).
    pub polish: bool,
    /// Record per-iteration residuals.
    #[serde(skip)]
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rho: 1.0,
            atol: 1e-9,
            rtol: 1e-7,
            max_iter: 20_000,
            over_relaxation: 1.6,
            adaptive_rho: true,
            polish: true,
            trace: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid("rho must be positive"));
        }
        if !(self.atol > 0.0 && self.rtol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(1.0..=1.9).contains(&self.over_relaxation) {
            return Err(Error::invalid("over-relaxation must lie in [1, 1.9]"));
        }
        Ok(())
    }
}

/// One line of a solver trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
}

/// Writes a trace as CSV with a header row.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TraceRow]) -> Result<()> {
    writeln!(w, "iteration,primal_residual,dual_residual,objective")?;
    for t in trace {
        writeln!(
            w,
            "{},{},{},{}",
            t.iteration,
            fmt_f64(t.primal_residual),
            fmt_f64(t.dual_residual),
            fmt_f64(t.objective)
        )?;
    }
    Ok(())
}

/// `min ‖u‖₁ s.t. M u = b`.
pub fn basis_pursuit_l1(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    opts: &SolveOptions,
) -> Result<AdmmSolution> {
    admm::solve(m, b, &L1, opts)
}

/// Stacks row-major vectorizations of `A_i` into a `k × pq` matrix.
pub fn stack_measurements(maps: &[DMatrix<f64>], p: usize, q: usize) -> Result<DMatrix<f64>> {
    if maps.is_empty() {
        return Err(Error::invalid("need at least one measurement matrix"));
    }
    if maps.iter().any(|a| a.shape() != (p, q)) {
        return Err(Error::invalid(format!("every measurement matrix must be {p}x{q}")));
    }
    Ok(DMatrix::from_fn(maps.len(), p * q, |i, j| maps[i][(j / q, j % q)]))
}

/// `min ‖U‖_nu s.t. ⟨A_i, U⟩ = b_i`. The returned `x` is `U` flattened
/// row-major.
pub fn basis_pursuit_nuclear(
    maps: &[DMatrix<f64>],
    b: &DVector<f64>,
    p: usize,
    q: usize,
    opts: &SolveOptions,
) -> Result<AdmmSolution> {
    let m = stack_measurements(maps, p, q)?;
    basis_pursuit_nuclear_stacked(&m, b, p, q, opts)
}

/// [`basis_pursuit_nuclear`] with the measurement map already stacked.
pub fn basis_pursuit_nuclear_stacked(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    p: usize,
    q: usize,
    opts: &SolveOptions,
) -> Result<AdmmSolution> {
    if m.ncols() != p * q {
        return Err(Error::invalid("measurement map width must equal p*q"));
    }
    admm::solve(m, b, &Nuclear::new(p, q), opts)
}
