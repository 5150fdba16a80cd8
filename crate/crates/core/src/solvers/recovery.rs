use nalgebra::{DMatrix, DVector};

use super::{admm, AdmmSolution, SolveOptions};
use crate::error::{Error, Result};
use crate::measurement::{build_linearized, ComplexSensingMatrix, PhaseVector};
use crate::signals::NormKind;
use crate::solvers::prox::{Nuclear, L1};

/// Result of a recovery pipeline.
#[derive(Debug, Clone)]
pub struct RecoveryOutcome {
    /// Final estimate: `x̂/‖x̂‖₂` for PO-CS, `x̂` for linear CS.
    pub estimate: Vec<f64>,
    /// Basis pursuit solution `x̂`.
    pub raw: Vec<f64>,
    /// `(rows, cols)`; `(n, 1)` for vectors.
    pub shape: (usize, usize),
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub constraint_residual: f64,
    pub objective: f64,
    pub converged: bool,
}

impl RecoveryOutcome {
    fn from_solution(sol: AdmmSolution, estimate: Vec<f64>, shape: (usize, usize)) -> Self {
        RecoveryOutcome {
            estimate,
            raw: sol.x,
            shape,
            iterations: sol.iterations,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            constraint_residual: sol.constraint_residual,
            objective: sol.objective,
            converged: sol.converged,
        }
    }

    /// `‖estimate − x‖₂`.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        self.estimate
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

fn check_shape(shape: (usize, usize), n: usize, norm: NormKind) -> Result<()> {
    let (p, q) = shape;
    if p * q != n {
        return Err(Error::invalid(format!("shape {p}x{q} does not match dimension {n}")));
    }
    if norm == NormKind::Nuclear && p > q {
        return Err(Error::invalid("matrix signals need rows <= cols"));
    }
    Ok(())
}

fn solve_with(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    shape: (usize, usize),
    norm: NormKind,
    opts: &SolveOptions,
) -> Result<AdmmSolution> {
    match norm {
        NormKind::L1 => admm::solve(m, b, &L1, opts),
        NormKind::Nuclear => admm::solve(m, b, &Nuclear::new(shape.0, shape.1), opts),
    }
}

/// PO-CS recovery: assemble `A_z`, solve `min f(u) s.t. A_z u = e1`, and
/// normalize. `shape` is `(n, 1)` for vectors or `(p, q)` for matrices
/// (flattened row-major in `Φ`'s columns).
pub fn recover_pocs(
    phi: &ComplexSensingMatrix,
    shape: (usize, usize),
    z: &PhaseVector,
    norm: NormKind,
    opts: &SolveOptions,
) -> Result<RecoveryOutcome> {
    check_shape(shape, phi.cols(), norm)?;
    let sys = build_linearized(phi, z)?;
    let sol = solve_with(&sys.matrix, &sys.rhs, shape, norm, opts)?;
    let norm2 = sol.x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm2 > f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("basis pursuit returned the zero vector".into()));
    }
    let estimate = sol.x.iter().map(|v| v / norm2).collect();
    Ok(RecoveryOutcome::from_solution(sol, estimate, shape))
}

/// Linear compressed sensing baseline: `min f(u) s.t. A u = y`.
pub fn recover_linear_cs(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    shape: (usize, usize),
    norm: NormKind,
    opts: &SolveOptions,
) -> Result<RecoveryOutcome> {
    check_shape(shape, a.ncols(), norm)?;
    let sol = solve_with(a, y, shape, norm, opts)?;
    let estimate = sol.x.clone();
    Ok(RecoveryOutcome::from_solution(sol, estimate, shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::{phases, sample_phi_seeded};
    use num_complex::Complex64;

    #[test]
    fn linear_identity_returns_measurements() {
        let y = DVector::from_vec(vec![0.6, 0.0, -0.8]);
        let out = recover_linear_cs(&DMatrix::identity(3, 3), &y, (3, 1), NormKind::L1, &SolveOptions::default()).unwrap();
        assert!(out.distance_to(y.as_slice()) < 1e-12);
    }

    #[test]
    fn linear_invertible_square_system() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 3.0]);
        let x = [0.3, -0.4, 0.5];
        let y = &a * DVector::from_row_slice(&x);
        for norm in [NormKind::L1] {
            let out = recover_linear_cs(&a, &y, (3, 1), norm, &SolveOptions::default()).unwrap();
            assert!(out.distance_to(&x) < 1e-10);
        }
        let out = recover_linear_cs(&a, &y, (1, 3), NormKind::Nuclear, &SolveOptions::default()).unwrap();
        assert!(out.distance_to(&x) < 1e-10);
    }

    #[test]
    fn full_information_phases_recover_e1() {
        // Φ = [I; I] scaled by distinct complex units: every coordinate is observed.
        let n = 4;
        let mut data = Vec::new();
        for i in 0..2 * n {
            for j in 0..n {
                data.push(if j == i % n {
                    Complex64::new(1.0 + i as f64, 0.5 * i as f64)
                } else {
                    Complex64::new(0.0, 0.0)
                });
            }
        }
        let phi = ComplexSensingMatrix::from_entries(2 * n, n, data).unwrap();
        let x = [1.0, 0.0, 0.0, 0.0];
        let z = phases(&phi, &x).unwrap();
        let out = recover_pocs(&phi, (n, 1), &z, NormKind::L1, &SolveOptions::default()).unwrap();
        assert!(out.distance_to(&x) < 1e-8, "{:?}", out.estimate);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let phi = sample_phi_seeded(5, 6, 1).unwrap();
        let z = phases(&phi, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(recover_pocs(&phi, (2, 2), &z, NormKind::L1, &SolveOptions::default()).is_err());
        assert!(recover_pocs(&phi, (3, 2), &z, NormKind::Nuclear, &SolveOptions::default()).is_err());
    }
}
