//! ℓ1 basis pursuit against an independent simplex solver.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use pocs::measurement::{build_linearized, phases, sample_phi};
use pocs::rng::stream;
use pocs::signals::make_equal_amplitude_sparse;
use pocs::solvers::{basis_pursuit_l1, SolveOptions};

/// `min Σ (p_j + q_j)` over `M (p − q) = b`, `p, q ≥ 0`.
fn lp_l1(m: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let n = m.ncols();
    let pos: Vec<_> = (0..n).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let neg: Vec<_> = (0..n).map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect();
    for i in 0..m.nrows() {
        let mut e = LinearExpr::empty();
        for j in 0..n {
            e.add(pos[j], m[(i, j)]);
            e.add(neg[j], -m[(i, j)]);
        }
        lp.add_constraint(e, ComparisonOp::Eq, b[i]);
    }
    lp.solve().expect("LP solvable").objective()
}

fn check(m: &DMatrix<f64>, b: &DVector<f64>, label: &str) {
    let sol = basis_pursuit_l1(m, b, &SolveOptions::default()).unwrap();
    let lp = lp_l1(m, b);
    assert!(sol.converged, "{label}: not converged");
    assert!(
        (sol.objective - lp).abs() <= 1e-6,
        "{label}: admm {} vs lp {lp}",
        sol.objective
    );
    let l1: f64 = sol.x.iter().map(|v| v.abs()).sum();
    assert!((l1 - sol.objective).abs() < 1e-12);
    let res = (m * DVector::from_column_slice(&sol.x) - b).norm();
    assert!(res <= 1e-7 * (1.0 + b.norm()), "{label}: residual {res}");
}

#[test]
fn gaussian_systems_match_lp() {
    for k in 0..25u64 {
        let mut rng = stream(101, &[k]);
        let (rows, n) = (8 + (k as usize % 10), 30);
        let m = DMatrix::from_fn(rows, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        // Mix of sparse and dense right-hand sides so some solutions are not the planted one.
        let x0 = if k % 2 == 0 {
            make_equal_amplitude_sparse(n, 3, None, &mut rng).unwrap().to_dense()
        } else {
            (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let b = &m * DVector::from_column_slice(&x0);
        check(&m, &b, &format!("gaussian {k}"));
    }
}

#[test]
fn linearized_phase_systems_match_lp() {
    for k in 0..25u64 {
        let mut rng = stream(202, &[k]);
        let (meas, n, s) = (6 + (k as usize % 12), 30, 1 + (k as usize % 5));
        let x = make_equal_amplitude_sparse(n, s, None, &mut rng).unwrap().to_dense();
        let phi = sample_phi(meas, n, &mut rng).unwrap();
        let z = phases(&phi, &x).unwrap();
        let sys = build_linearized(&phi, &z).unwrap();
        check(&sys.matrix, &sys.rhs, &format!("phase system {k}"));
    }
}
