//! ADMM for `min f(u) s.t. M u = b`.
//!
//! The splitting is `u = w` with `u` constrained to the affine set and `w`
//! carrying the norm:
//!
//! ```text
//! u ← Π(w − y)                          projection onto {Mu = b}
//! û ← α u + (1 − α) w                   over-relaxation
//! w ← prox_{f/ρ}(û + y)
//! y ← y + û − w
//! ```
//!
//! The projection uses a thin QR factorization of `Mᵀ` computed once per
//! solve (`RᵀR = MMᵀ`); rank-deficient systems fall back to an SVD
//! pseudo-inverse.

use nalgebra::{DMatrix, DVector};

use super::prox::NormProx;
use super::{SolveOptions, TraceRow};
use crate::error::{Error, Result};

/// Affine projector `v ↦ v − Q Qᵀ v + u0`, where the columns of `Q` span the
/// row space of `M` and `u0` is the minimum-norm solution of `M u = b`.
pub struct AffineProjector {
    q: DMatrix<f64>,
    u0: DVector<f64>,
    /// `‖M u0 − b‖`: zero (to rounding) iff the system is consistent.
    pub consistency_residual: f64,
}

const RANK_TOL: f64 = 1e-12;

impl AffineProjector {
    pub fn new(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        if m.nrows() != b.len() {
            return Err(Error::invalid(format!(
                "constraint matrix has {} rows, right-hand side has {}",
                m.nrows(),
                b.len()
            )));
        }
        let n = m.ncols();
        // Zero rows carry no constraint unless their right-hand side is nonzero.
        let mut keep = Vec::new();
        let mut dropped_residual = 0.0f64;
        for i in 0..m.nrows() {
            if m.row(i).iter().all(|&v| v == 0.0) {
                dropped_residual = dropped_residual.hypot(b[i]);
            } else {
                keep.push(i);
            }
        }
        if keep.is_empty() {
            return Ok(AffineProjector {
                q: DMatrix::zeros(n, 0),
                u0: DVector::zeros(n),
                consistency_residual: dropped_residual,
            });
        }
        let mk = m.select_rows(&keep);
        let bk = DVector::from_iterator(keep.len(), keep.iter().map(|&i| b[i]));
        let mt = mk.transpose();

        let (q, u0) = if keep.len() <= n {
            let qr = mt.clone().qr();
            let r = qr.r();
            let rmax = r.diagonal().amax();
            let full_rank = r.diagonal().iter().all(|d| d.abs() > RANK_TOL * rmax.max(1.0));
            if full_rank {
                let q = qr.q();
                // M = Rᵀ Qᵀ, so u0 = Q R⁻ᵀ b.
                let w = r
                    .transpose()
                    .solve_lower_triangular(&bk)
                    .ok_or_else(|| Error::invalid("singular triangular factor"))?;
                let u0 = &q * w;
                (q, u0)
            } else {
                Self::pinv_parts(&mt, &bk)
            }
        } else {
            Self::pinv_parts(&mt, &bk)
        };
        let consistency_residual = (&mk * &u0 - &bk).norm().hypot(dropped_residual);
        Ok(AffineProjector {
            q,
            u0,
            consistency_residual,
        })
    }

    /// `(U_r, pinv(M) b)` from the SVD `Mᵀ = U S Vᵀ`.
    fn pinv_parts(mt: &DMatrix<f64>, b: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let svd = mt.clone().svd(true, true);
        let u = svd.u.expect("u requested");
        let vt = svd.v_t.expect("v requested");
        let smax = svd.singular_values.amax();
        let keep: Vec<usize> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > RANK_TOL * smax.max(1.0) * (mt.nrows().max(mt.ncols()) as f64))
            .map(|(i, _)| i)
            .collect();
        let ur = u.select_columns(&keep);
        let mut coeff = DVector::zeros(keep.len());
        for (k, &i) in keep.iter().enumerate() {
            coeff[k] = vt.row(i).dot(&b.transpose()) / svd.singular_values[i];
        }
        let u0 = &ur * coeff;
        (ur, u0)
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    /// Projects `v` onto the affine set, in place.
    pub fn project(&self, v: &mut DVector<f64>, scratch: &mut DVector<f64>) {
        if self.q.ncols() > 0 {
            self.q.tr_mul_to(v, scratch);
            v.gemv(-1.0, &self.q, scratch, 1.0);
        }
        *v += &self.u0;
    }

    pub fn min_norm_solution(&self) -> &DVector<f64> {
        &self.u0
    }

    fn scratch(&self) -> DVector<f64> {
        DVector::zeros(self.q.ncols())
    }
}

/// Raw solver output.
#[derive(Debug, Clone)]
pub struct AdmmSolution {
    /// The affine iterate `u` (feasible to rounding).
    pub x: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `‖M x − b‖₂`.
    pub constraint_residual: f64,
    pub objective: f64,
    pub converged: bool,
    /// Stopped on an exact active-set certificate rather than residuals.
    pub polished: bool,
    pub trace: Option<Vec<TraceRow>>,
}

const RHO_UPDATE_PERIOD: usize = 10;
const RHO_BALANCE: f64 = 10.0;
const RHO_FACTOR: f64 = 2.0;
const POLISH_PERIOD: usize = 50;

/// Runs ADMM to minimize `norm` over `{u : M u = b}`.
pub fn solve<P: NormProx>(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    norm: &P,
    opts: &SolveOptions,
) -> Result<AdmmSolution> {
    opts.validate()?;
    let proj = AffineProjector::new(m, b)?;
    let bnorm = b.norm();
    if proj.consistency_residual > opts.atol.max(1e-10) * (1.0 + bnorm) {
        return Err(Error::Infeasible {
            residual: proj.consistency_residual,
        });
    }
    let n = proj.dim();
    let sqrt_n = (n as f64).sqrt();
    let mut rho = opts.rho;
    let alpha = opts.over_relaxation;

    let mut x = DVector::<f64>::zeros(n);
    let mut w = proj.min_norm_solution().clone();
    let mut y = DVector::<f64>::zeros(n);
    let mut w_old = DVector::<f64>::zeros(n);
    let mut xhat = DVector::<f64>::zeros(n);
    let mut scratch = proj.scratch();
    let mut trace = opts.trace.then(Vec::new);

    let feas_tol = opts.atol.max(1e-10) * (1.0 + bnorm);
    let mut iterations = 0;
    let mut converged = false;
    let mut polished = false;
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
    for k in 1..=opts.max_iter {
        iterations = k;
        x.copy_from(&w);
        x -= &y;
        proj.project(&mut x, &mut scratch);

        w_old.copy_from(&w);
        xhat.copy_from(&x);
        xhat *= alpha;
        xhat.axpy(1.0 - alpha, &w_old, 1.0);

        let mut v = xhat.clone();
        v += &y;
        norm.prox(v.as_slice(), 1.0 / rho, w.as_mut_slice());

        y += &xhat;
        y -= &w;

        r_norm = (&x - &w).norm();
        s_norm = rho * (&w - &w_old).norm();
        let eps_pri = sqrt_n * opts.atol + opts.rtol * x.norm().max(w.norm());
        let eps_dual = sqrt_n * opts.atol + opts.rtol * rho * y.norm();
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                iteration: k,
                primal_residual: r_norm,
                dual_residual: s_norm,
                objective: norm.value(w.as_slice()),
            });
        }
        if r_norm <= eps_pri && s_norm <= eps_dual {
            converged = true;
            break;
        }
        if opts.polish && k % POLISH_PERIOD == 0 {
            let dual: Vec<f64> = y.iter().map(|v| rho * v).collect();
            if let Some(exact) = norm.certify(m, b, w.as_slice(), &dual, feas_tol, k % (10 * POLISH_PERIOD) == 0) {
                x.copy_from_slice(&exact);
                converged = true;
                polished = true;
                break;
            }
        }
        if opts.adaptive_rho && k % RHO_UPDATE_PERIOD == 0 {
            // y is the scaled dual, so it scales inversely with rho.
            if r_norm > RHO_BALANCE * s_norm {
                rho *= RHO_FACTOR;
                y /= RHO_FACTOR;
            } else if s_norm > RHO_BALANCE * r_norm {
                rho /= RHO_FACTOR;
                y *= RHO_FACTOR;
            }
        }
    }

    let constraint_residual = (m * &x - b).norm();
    Ok(AdmmSolution {
        objective: norm.value(x.as_slice()),
        x: x.as_slice().to_vec(),
        iterations,
        primal_residual: r_norm,
        dual_residual: s_norm,
        constraint_residual,
        converged,
        polished,
        trace,
    })
}
