//! Sparse-recovery thresholds: `ψ1` (linear CS) and `ψ` (phase-only CS).

use std::f64::consts::PI;

use statrs::function::erf::erfc;

use super::minimize::minimize_convex;
use super::{check_unit_open, Method, ThresholdResult, PHASE_GAIN};
use crate::error::{Error, Result};
use crate::signals::SparseSignal;

/// Standard normal density.
pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Upper tail `P(g > t)` of the standard normal.
pub fn normal_tail(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

/// `E[shrink(g; τ)²] = √(2/π) ∫_τ^∞ (w − τ)² e^{−w²/2} dw
///                  = 2[(1 + τ²) Q(τ) − τ φ(τ)]`.
pub fn shrink_second_moment(tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be nonnegative, got {tau}")));
    }
    Ok(shrink_moment_unchecked(tau))
}

pub(crate) fn shrink_moment_unchecked(tau: f64) -> f64 {
    (2.0 * ((1.0 + tau * tau) * normal_tail(tau) - tau * normal_pdf(tau))).max(0.0)
}

/// `d/dτ E[shrink(g; τ)²] = −4[φ(τ) − τ Q(τ)]`.
pub(crate) fn shrink_moment_derivative(tau: f64) -> f64 {
    -4.0 * (normal_pdf(tau) - tau * normal_tail(tau))
}

/// `ψ(u, v) = inf_τ u(1 + τ² − τ² v (1 − 2/π)) + (1 − u) E[shrink(g; τ)²]`.
///
/// `v = 0` reduces to `ψ1(u)`.
pub fn psi(u: f64, v: f64) -> Result<ThresholdResult> {
    check_unit_open(u, "u")?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!("v must lie in [0, 1], got {v}")));
    }
    let k = 1.0 - v * PHASE_GAIN;
    let f = |t: f64| u * (1.0 + k * t * t) + (1.0 - u) * shrink_moment_unchecked(t);
    let df = |t: f64| 2.0 * u * k * t + (1.0 - u) * shrink_moment_derivative(t);
    let min = minimize_convex(f, df);
    Ok(ThresholdResult::from_minimum(min, Method::ClosedForm))
}

/// `ψ1(u) = inf_τ u(1 + τ²) + (1 − u) E[shrink(g; τ)²]`.
pub fn psi1(u: f64) -> Result<ThresholdResult> {
    psi(u, 0.0)
}

/// `R_sp(u, v) = ψ(u, v) / ψ1(u)`.
pub fn ratio_sp(u: f64, v: f64) -> Result<f64> {
    Ok(psi(u, v)?.value / psi1(u)?.value)
}

fn check_sparse_dims(n: usize, s: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::invalid(format!("need 1 <= s <= n, got s={s}, n={n}")));
    }
    Ok(())
}

/// Linear-CS transition `n ψ1(s/n)`.
pub fn zeta_ln_sparse(n: usize, s: usize) -> Result<ThresholdResult> {
    check_sparse_dims(n, s)?;
    Ok(psi1(s as f64 / n as f64)?.scaled(n as f64))
}

/// PO-CS surrogate `n ψ(s/n, ‖x‖₁²/s)` for explicit `(n, s, ‖x‖₁)`.
pub fn zeta_hat_po_sparse_params(n: usize, s: usize, l1: f64) -> Result<ThresholdResult> {
    check_sparse_dims(n, s)?;
    let v = l1 * l1 / s as f64;
    if !(v > 0.0 && v <= 1.0 + 1e-12) {
        return Err(Error::invalid(format!("l1 norm {l1} is infeasible for an {s}-sparse unit vector")));
    }
    Ok(psi(s as f64 / n as f64, v.min(1.0))?.scaled(n as f64))
}

/// PO-CS surrogate for a concrete signal.
pub fn zeta_hat_po_sparse(x: &SparseSignal) -> Result<ThresholdResult> {
    zeta_hat_po_sparse_params(x.n(), x.sparsity(), x.l1())
}
