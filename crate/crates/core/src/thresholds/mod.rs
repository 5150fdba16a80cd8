//! Phase-transition locations.
//!
//! For linear CS the transition of basis pursuit sits at the statistical
//! dimension of the descent cone, `n ψ1(s/n)` (ℓ1) and `pq Ψ1(r/p, p/q)`
//! (nuclear). For PO-CS the subdifferential is first mapped by
//! `Q_x⁻¹ = I − (1 − √(2/π)) x xᵀ`, which shrinks the on-support part and
//! moves the transition to `n ψ(s/n, ‖x‖₁²/s)` and
//! `pq Ψ(r/p, p/q, ‖X‖²_nu/r)`. All four are one-dimensional convex
//! minimizations over a threshold `τ`; [`montecarlo`] evaluates the same
//! expected squared distance by sampling.

pub mod lowrank;
pub mod minimize;
pub mod montecarlo;
pub mod sparse;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use minimize::Minimum;

pub use lowrank::{
    mp_moment, psi_lr, psi_lr1, ratio_lr, residual_aspect, zeta_hat_po_lowrank,
    zeta_hat_po_lowrank_params, zeta_ln_lowrank, MPParams,
};
pub use montecarlo::{mc_dist2_curve, mc_dist2_subdiff, zeta_hat_po_monte_carlo, McEstimate, McPlan};
pub use sparse::{
    psi, psi1, ratio_sp, shrink_second_moment, zeta_hat_po_sparse, zeta_hat_po_sparse_params,
    zeta_ln_sparse,
};

/// `1 − 2/π`: the fraction of the on-signal τ² term removed by phase-only sensing.
pub const PHASE_GAIN: f64 = 1.0 - 2.0 / PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A transition value together with its inner minimizer `τ*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub value: f64,
    pub tau_star: f64,
    pub method: Method,
    /// Quadrature error bound, standard error of the mean for Monte Carlo,
    /// and a rounding-level bound for closed forms.
    pub error_estimate: f64,
    /// `|f'(τ*)|` of the inner objective (0 on the boundary `τ = 0`).
    #[serde(skip)]
    pub stationarity: f64,
}

impl ThresholdResult {
    pub(crate) fn from_minimum(min: Minimum, method: Method) -> Self {
        ThresholdResult {
            value: min.value,
            tau_star: min.tau,
            method,
            error_estimate: 8.0 * f64::EPSILON * min.value.abs().max(1.0),
            stationarity: min.stationarity,
        }
    }

    /// Multiplies the value (and its error) by an ambient dimension.
    pub(crate) fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.error_estimate *= factor;
        self
    }
}

pub(crate) fn check_unit_open(u: f64, name: &str) -> Result<()> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::invalid(format!("{name} must lie in (0, 1], got {u}")));
    }
    Ok(())
}
