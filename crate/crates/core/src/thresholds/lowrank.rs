//! Low-rank thresholds: `Ψ1` (linear CS) and `Ψ` (phase-only CS), both
//! built on truncated moments of the Marcenko–Pastur singular-value density
//!
//! ```text
//! φ_y(b) = √((b² − a₋²)(a₊² − b²)) / (π y b),   b ∈ [a₋, a₊],  a± = 1 ± √y.
//! ```
//!
//! Integrals over `b` are taken in the angle `θ` with `b = 1 + √y cos θ`,
//! which absorbs the square-root vanishing of `φ_y` at both edges. With
//! `s = sin(θ/2)`, `c = cos(θ/2)` the transformed weight is
//!
//! ```text
//! φ_y(b) |db/dθ| = sin²θ √((b + a₋)(b + a₊)) / (π b)
//! ```
//!
//! and for `y = 1` (`a₋ = 0`) the `1/b` pole cancels to `2√2 s² c √(b + 2) / π`.

use super::minimize::minimize_convex;
use super::{Method, ThresholdResult, PHASE_GAIN};
use crate::error::{Error, Result};
use crate::quad;
use crate::signals::LowRankSignal;

const QUAD_TOL: f64 = 1e-13;

/// Marcenko–Pastur parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MPParams {
    y: f64,
    a_minus: f64,
    a_plus: f64,
}

impl MPParams {
    pub fn new(y: f64) -> Result<Self> {
        if !(y > 0.0 && y <= 1.0) {
            return Err(Error::invalid(format!("Marcenko-Pastur ratio y must lie in (0, 1], got {y}")));
        }
        let r = y.sqrt();
        Ok(MPParams {
            y,
            a_minus: (1.0 - r).max(0.0),
            a_plus: 1.0 + r,
        })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn a_minus(&self) -> f64 {
        self.a_minus
    }

    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }

    /// `φ_y(b)`; zero outside the support.
    pub fn density(&self, b: f64) -> f64 {
        if b <= self.a_minus || b >= self.a_plus {
            return 0.0;
        }
        let am2 = self.a_minus * self.a_minus;
        let ap2 = self.a_plus * self.a_plus;
        ((b * b - am2) * (ap2 - b * b)).sqrt() / (std::f64::consts::PI * self.y * b)
    }

    /// `b(θ)` and the transformed weight `φ_y(b)|db/dθ|`.
    fn node(&self, theta: f64) -> (f64, f64) {
        let sqrt_y = self.y.sqrt();
        let (s, c) = (0.5 * theta).sin_cos();
        // b − a₋ = 2√y cos²(θ/2), written this way to keep b accurate near a₋.
        let b = self.a_minus + 2.0 * sqrt_y * c * c;
        let w = if self.a_minus == 0.0 {
            2.0 * std::f64::consts::SQRT_2 * s * s * c.abs() * (b + self.a_plus).sqrt()
        } else {
            let sin_t = theta.sin();
            sin_t * sin_t * ((b + self.a_minus) * (b + self.a_plus)).sqrt() / b
        };
        (b, w / std::f64::consts::PI)
    }

    /// Angle at which `b(θ) = τ`, for `τ` inside the support.
    fn theta_of(&self, tau: f64) -> f64 {
        ((tau - 1.0) / self.y.sqrt()).clamp(-1.0, 1.0).acos()
    }

    /// `∫_{max(a₋, lo)}^{a₊} g(b) φ_y(b) db`.
    fn integrate<G: Fn(f64) -> f64>(&self, lo: f64, g: G) -> quad::Estimate {
        if lo >= self.a_plus {
            return quad::Estimate { value: 0.0, error: 0.0 };
        }
        let theta_hi = if lo <= self.a_minus {
            std::f64::consts::PI
        } else {
            self.theta_of(lo)
        };
        quad::integrate(
            |t| {
                let (b, w) = self.node(t);
                g(b) * w
            },
            0.0,
            theta_hi,
            QUAD_TOL,
        )
    }

    /// `∫ φ_y` over the support (equals 1).
    pub fn total_mass(&self) -> f64 {
        self.integrate(0.0, |_| 1.0).value
    }

    /// `∫ bᵏ φ_y(b) db`.
    pub fn raw_moment(&self, k: i32) -> f64 {
        self.integrate(0.0, |b| b.powi(k)).value
    }
}

/// Truncated second moment `∫_{max(a₋,τ)}^{a₊} (b − τ)² φ_y(b) db` with its
/// derivative in `τ` and a quadrature error bound.
#[derive(Debug, Clone, Copy)]
struct MpMoments {
    params: MPParams,
    m1: f64,
    m2: f64,
}

impl MpMoments {
    fn new(params: MPParams) -> Self {
        MpMoments {
            params,
            m1: params.raw_moment(1),
            m2: params.raw_moment(2),
        }
    }

    fn value(&self, tau: f64) -> quad::Estimate {
        let p = &self.params;
        if tau >= p.a_plus {
            return quad::Estimate { value: 0.0, error: 0.0 };
        }
        if tau <= p.a_minus {
            // The whole support lies above τ: expand the square.
            return quad::Estimate {
                value: self.m2 - 2.0 * tau * self.m1 + tau * tau,
                error: QUAD_TOL,
            };
        }
        p.integrate(tau, |b| (b - tau) * (b - tau))
    }

    fn derivative(&self, tau: f64) -> f64 {
        let p = &self.params;
        if tau >= p.a_plus {
            return 0.0;
        }
        if tau <= p.a_minus {
            return 2.0 * (tau - self.m1);
        }
        -2.0 * p.integrate(tau, |b| b - tau).value
    }
}

/// `∫_{max(a₋,τ)}^{a₊} (b − τ)² φ_y(b) db`; exactly 0 for `τ ≥ a₊`.
pub fn mp_moment(params: &MPParams, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be nonnegative, got {tau}")));
    }
    if tau >= params.a_plus {
        return Ok(0.0);
    }
    // Direct quadrature (no moment expansion) so that τ = 0 exercises the integral.
    Ok(params.integrate(tau, |b| (b - tau) * (b - tau)).value)
}

/// `y = (ν − ρν) / (1 − ρν)`: aspect ratio of the block orthogonal to `X`.
pub fn residual_aspect(rho: f64, nu: f64) -> f64 {
    (nu - rho * nu) / (1.0 - rho * nu)
}

fn check_lr_args(rho: f64, nu: f64, mu: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::invalid(format!("nu must lie in (0, 1], got {nu}")));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::invalid(format!("mu must lie in [0, 1], got {mu}")));
    }
    Ok(())
}

/// `Ψ(ρ, ν, μ) = inf_τ ρν + (1 − ρν)[ρ(1 + (1 − (1 − 2/π)μ)τ²) + (1 − ρ) M_y(τ)]`
/// with `M_y` the truncated MP moment. `μ = 0` gives `Ψ1(ρ, ν)`.
pub fn psi_lr(rho: f64, nu: f64, mu: f64) -> Result<ThresholdResult> {
    check_lr_args(rho, nu, mu)?;
    let k = 1.0 - PHASE_GAIN * mu;
    let outer = 1.0 - rho * nu;
    if rho == 1.0 {
        // No orthogonal block: the objective is ν + (1 − ν)(1 + kτ²).
        let min = minimize_convex(|t| nu + outer * (1.0 + k * t * t), |t| 2.0 * outer * k * t);
        return Ok(ThresholdResult::from_minimum(min, Method::Quadrature));
    }
    let moments = MpMoments::new(MPParams::new(residual_aspect(rho, nu))?);
    let f = |t: f64| rho * nu + outer * (rho * (1.0 + k * t * t) + (1.0 - rho) * moments.value(t).value);
    let df = |t: f64| outer * (2.0 * rho * k * t + (1.0 - rho) * moments.derivative(t));
    let min = minimize_convex(f, df);
    let mut res = ThresholdResult::from_minimum(min, Method::Quadrature);
    res.error_estimate = outer * (1.0 - rho) * moments.value(min.tau).error;
    Ok(res)
}

/// `Ψ1(ρ, ν)`.
pub fn psi_lr1(rho: f64, nu: f64) -> Result<ThresholdResult> {
    psi_lr(rho, nu, 0.0)
}

/// `R_lr(u, v, w) = Ψ(u, v, w) / Ψ1(u, v)`.
pub fn ratio_lr(u: f64, v: f64, w: f64) -> Result<f64> {
    Ok(psi_lr(u, v, w)?.value / psi_lr1(u, v)?.value)
}

fn check_lr_dims(p: usize, q: usize, r: usize) -> Result<()> {
    if p == 0 || p > q || r == 0 || r > p {
        return Err(Error::invalid(format!("need 1 <= r <= p <= q, got p={p}, q={q}, r={r}")));
    }
    Ok(())
}

/// Linear-CS transition `pq Ψ1(r/p, p/q)`.
pub fn zeta_ln_lowrank(p: usize, q: usize, r: usize) -> Result<ThresholdResult> {
    check_lr_dims(p, q, r)?;
    Ok(psi_lr1(r as f64 / p as f64, p as f64 / q as f64)?.scaled((p * q) as f64))
}

/// PO-CS surrogate `pq Ψ(r/p, p/q, ‖X‖²_nu / r)` for explicit parameters.
pub fn zeta_hat_po_lowrank_params(p: usize, q: usize, r: usize, nuclear: f64) -> Result<ThresholdResult> {
    check_lr_dims(p, q, r)?;
    let mu = nuclear * nuclear / r as f64;
    if !(mu > 0.0 && mu <= 1.0 + 1e-12) {
        return Err(Error::invalid(format!("nuclear norm {nuclear} is infeasible for a rank-{r} unit matrix")));
    }
    Ok(psi_lr(r as f64 / p as f64, p as f64 / q as f64, mu.min(1.0))?.scaled((p * q) as f64))
}

/// PO-CS surrogate for a concrete matrix.
pub fn zeta_hat_po_lowrank(x: &LowRankSignal) -> Result<ThresholdResult> {
    zeta_hat_po_lowrank_params(x.rows(), x.cols(), x.rank(), x.nuclear())
}
