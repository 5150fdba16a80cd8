//! One recovery trial.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Problem, RowGrid, Sensing};
use crate::error::{Error, Result};
use crate::measurement::{phases, sample_phi};
use crate::rng::{self, purpose, SimRng};
use crate::signals::{
    make_equal_amplitude_sparse, make_lowrank_with_nuclear, make_sparse_with_l1, NormKind,
};
use crate::solvers::{recover_linear_cs, recover_pocs, RecoveryOutcome};

/// One `(sensing model, row, m)` cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub sensing: Sensing,
    pub row: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub success: bool,
    /// `‖x♯ − x‖₂`; infinite when the solver produced no estimate.
    pub distance: f64,
    pub converged: bool,
}

/// Ground truth for a trial. Its stream depends only on the row and the
/// trial index, so PO-CS and linear-CS cells (and every `m`) see the same
/// signals.
pub fn trial_signal(cfg: &ExperimentConfig, row: usize, trial: usize) -> Result<Vec<f64>> {
    let mut rng = rng::stream(cfg.seed, &[purpose::SIGNAL, row as u64, trial as u64]);
    let spec = *cfg
        .rows
        .rows()
        .get(row)
        .ok_or_else(|| Error::invalid(format!("row {row} out of range")))?;
    let x = match (cfg.problem, &cfg.rows) {
        (Problem::Sparse { n }, RowGrid::Sparsity { .. }) => {
            make_equal_amplitude_sparse(n, spec.order, None, &mut rng)?.to_dense()
        }
        (Problem::Sparse { n }, RowGrid::L1 { .. }) => {
            make_sparse_with_l1(n, spec.order, spec.norm_param, &mut rng)?.to_dense()
        }
        (Problem::Lowrank { p, q }, RowGrid::Rank { .. } | RowGrid::Nuclear { .. }) => {
            make_lowrank_with_nuclear(p, q, spec.order, spec.norm_param, &mut rng)?.to_vec()
        }
        _ => return Err(Error::invalid("row grid does not match the problem")),
    };
    Ok(x)
}

fn sensing_stream(cfg: &ExperimentConfig, cell: &Cell, trial: usize) -> SimRng {
    rng::stream(
        cfg.seed,
        &[purpose::SENSING, cell.sensing.label(), cell.row as u64, cell.m as u64, trial as u64],
    )
}

fn shape_and_norm(problem: Problem) -> ((usize, usize), NormKind) {
    match problem {
        Problem::Sparse { n } => ((n, 1), NormKind::L1),
        Problem::Lowrank { p, q } => ((p, q), NormKind::Nuclear),
    }
}

/// Generates the signal and measurements of `trial` in `cell`, recovers,
/// and scores the estimate against `cfg.success_threshold`.
pub fn run_trial(cfg: &ExperimentConfig, cell: &Cell, trial: usize) -> Result<TrialOutcome> {
    if cell.m == 0 {
        return Err(Error::invalid("need at least one measurement"));
    }
    let x = trial_signal(cfg, cell.row, trial)?;
    let (shape, norm) = shape_and_norm(cfg.problem);
    let mut rng = sensing_stream(cfg, cell, trial);
    let recovered = match cell.sensing {
        Sensing::Po => {
            let phi = sample_phi(cell.m, x.len(), &mut rng)?;
            let z = phases(&phi, &x)?;
            recover_pocs(&phi, shape, &z, norm, &cfg.solver)
        }
        Sensing::Ln => {
            let a = DMatrix::from_fn(cell.m, x.len(), |_, _| -> f64 { StandardNormal.sample(&mut rng) });
            let y = &a * DVector::from_column_slice(&x);
            recover_linear_cs(&a, &y, shape, norm, &cfg.solver)
        }
    };
    Ok(score(recovered, &x, cfg.success_threshold)?)
}

fn score(recovered: Result<RecoveryOutcome>, x: &[f64], threshold: f64) -> Result<TrialOutcome> {
    match recovered {
        Ok(out) => {
            let distance = out.distance_to(x);
            Ok(TrialOutcome {
                success: distance <= threshold,
                distance,
                converged: out.converged,
            })
        }
        // The solver could not produce an estimate; count a failure.
        Err(Error::Degenerate(_)) => Ok(TrialOutcome {
            success: false,
            distance: f64::INFINITY,
            converged: true,
        }),
        Err(Error::Infeasible { .. }) => Ok(TrialOutcome {
            success: false,
            distance: f64::INFINITY,
            converged: false,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text_rows: &str, m: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"schema":"pocs.sweep/1","name":"t","problem":{{"kind":"sparse","n":40}},
                "rows":{text_rows},"m":{m},"trials":3,"sensing":["po","ln"]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn trials_are_reproducible_and_distinct() {
        let c = cfg(r#"{"vary":"sparsity","values":[3]}"#, "[30]");
        let cell = Cell { sensing: Sensing::Po, row: 0, m: 30 };
        let a = run_trial(&c, &cell, 0).unwrap();
        let b = run_trial(&c, &cell, 0).unwrap();
        assert_eq!(a.distance.to_bits(), b.distance.to_bits());
        assert_ne!(trial_signal(&c, 0, 0).unwrap(), trial_signal(&c, 0, 1).unwrap());
    }

    #[test]
    fn far_above_threshold_succeeds() {
        let c = cfg(r#"{"vary":"sparsity","values":[2]}"#, "[36]");
        for sensing in [Sensing::Po, Sensing::Ln] {
            let out = run_trial(&c, &Cell { sensing, row: 0, m: 36 }, 0).unwrap();
            assert!(out.success && out.converged, "{sensing:?} {out:?}");
        }
    }

    #[test]
    fn signals_follow_the_row_family() {
        let c = cfg(r#"{"vary":"l1","s":4,"values":[1.5]}"#, "[10]");
        let x = trial_signal(&c, 0, 0).unwrap();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        assert!((l1 - 1.5).abs() < 1e-12);
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 4);
    }
}
