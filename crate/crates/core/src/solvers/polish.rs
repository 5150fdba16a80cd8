//! Active-set polishing for ℓ1 basis pursuit.
//!
//! ADMM converges slowly on degenerate instances, which are common near the
//! phase transition. Once the iterate has settled on a support `S`, the exact
//! solution on `S` and a dual certificate can be computed directly:
//!
//! * `x_S` solves `M_S x_S = b` (unique when `M_S` has full column rank),
//! * `λ` starts from the ADMM multiplier (least squares on `Mᵀλ ≈ ρy`) and is
//!   corrected by the minimum-norm change that makes `(Mᵀλ)_S = sign(x_S)`,
//! * `x` is optimal iff additionally `‖(Mᵀλ)_{S^c}‖∞ ≤ 1`.

use nalgebra::{DMatrix, DVector};

/// Slack allowed on the off-support dual bound.
const DUAL_SLACK: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;
const SUPPORT_TOL: f64 = 1e-6;
const PAD_CANDIDATES: usize = 8;

/// An exactly optimal point with its certificate.
#[derive(Debug, Clone)]
pub struct Certified {
    pub x: Vec<f64>,
    /// `‖(Mᵀλ)_{S^c}‖∞`.
    pub dual_bound: f64,
}

fn pinv_solve(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.amax();
    if smax == 0.0 {
        return None;
    }
    svd.solve(rhs, RANK_TOL * smax).ok()
}

fn full_column_rank(a: &DMatrix<f64>) -> bool {
    if a.ncols() > a.nrows() || a.ncols() == 0 {
        return false;
    }
    let sv = a.singular_values();
    sv.min() > RANK_TOL * sv.max()
}

/// Checks the KKT conditions on `support`, returning the optimal point.
fn certify_support(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    support: &[usize],
    lambda0: &DVector<f64>,
    feas_tol: f64,
) -> Option<Certified> {
    let n = m.ncols();
    let ms = m.select_columns(support);
    if !full_column_rank(&ms) {
        return None;
    }
    let xs = pinv_solve(&ms, b)?;
    if (&ms * &xs - b).norm() > feas_tol || xs.iter().any(|&v| v == 0.0) {
        return None;
    }
    let signs = DVector::from_iterator(support.len(), xs.iter().map(|v| v.signum()));
    let gap = &signs - ms.transpose() * lambda0;
    let delta = pinv_solve(&ms.transpose(), &gap)?;
    let g = m.transpose() * (lambda0 + delta);

    let mut on_support = vec![false; n];
    for (k, &i) in support.iter().enumerate() {
        if (g[i] - signs[k]).abs() > 1e-8 {
            return None;
        }
        on_support[i] = true;
    }
    let dual_bound = (0..n)
        .filter(|&i| !on_support[i])
        .map(|i| g[i].abs())
        .fold(0.0, f64::max);
    if dual_bound > 1.0 + DUAL_SLACK {
        return None;
    }
    let mut x = vec![0.0; n];
    for (&i, &v) in support.iter().zip(xs.iter()) {
        x[i] = v;
    }
    Some(Certified { x, dual_bound })
}

/// Tries to certify the support of `w` as optimal for
/// `min ‖x‖₁ s.t. M x = b`, given the ADMM dual estimate `dual ≈ ρy`.
///
/// With `pad`, if the support of `w` is too small to meet the constraints, it is padded
/// with the off-support coordinates whose dual values are closest to ±1.
pub fn certify_l1(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    w: &[f64],
    dual: &[f64],
    feas_tol: f64,
    pad: bool,
) -> Option<Certified> {
    let wmax = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if wmax == 0.0 {
        return None;
    }
    // Entries this small are still drifting to zero.
    let support: Vec<usize> = (0..w.len()).filter(|&i| w[i].abs() > SUPPORT_TOL * wmax).collect();
    let lambda0 = pinv_solve(&m.transpose(), &DVector::from_row_slice(dual))?;
    if let Some(c) = certify_support(m, b, &support, &lambda0, feas_tol) {
        return Some(c);
    }
    let rows = m.nrows();
    if !pad || support.len() >= rows {
        return None;
    }
    let g0 = m.transpose() * &lambda0;
    let mut rest: Vec<usize> = (0..w.len()).filter(|i| !support.contains(i)).collect();
    rest.sort_by(|&i, &j| g0[j].abs().total_cmp(&g0[i].abs()));
    let deficit = rows - support.len();
    // The dual estimate is rough, so try each strong candidate as the lead.
    for lead in 0..PAD_CANDIDATES.min(rest.len()) {
        let mut padded = support.clone();
        padded.push(rest[lead]);
        padded.extend(rest.iter().enumerate().filter(|&(k, _)| k != lead).map(|(_, &i)| i).take(deficit - 1));
        padded.sort_unstable();
        if let Some(c) = certify_support(m, b, &padded, &lambda0, feas_tol) {
            return Some(c);
        }
    }
    None
}
