//! Monte Carlo phase-transition experiments.
//!
//! A sweep runs independent recovery trials over a grid of measurement
//! counts `m` for each row of a signal-parameter grid (sparsity, ℓ1 norm,
//! rank or nuclear norm), counts successes (`‖x♯ − x‖₂ ≤ 10⁻³` by default),
//! and fits a logistic curve per row to locate the empirical transition
//! `m50`. Rows can be run under phase-only and linear sensing on the same
//! signals.
//!
//! Every trial draws from its own counter-derived stream, so a cell can be
//! rerun in isolation and results do not depend on scheduling.

pub mod config;
pub mod fit;
pub mod sweep;
pub mod trial;

pub use config::{AutoGrid, ExperimentConfig, MGrid, Problem, RowGrid, RowSpec, Sensing, SWEEP_SCHEMA};
pub use fit::{logistic_fit, trend_statistic, Binomial, TransitionFit};
pub use sweep::{
    amplitude_sweep, plan_cells, run_cell, success_rate_plot, summarize, sweep, transition_plot,
    write_csv, write_outputs, CellRecord,
    OutputFiles, RowSummary, SweepOptions, SweepResult,
};
pub use trial::{run_trial, trial_signal, Cell, TrialOutcome};
