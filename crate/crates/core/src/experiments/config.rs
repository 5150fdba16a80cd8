//! Sweep configuration files.
//!
//! ```json
//! {
//!   "schema": "pocs.sweep/1",
//!   "name": "sparse-sparsity",
//!   "problem": { "kind": "sparse", "n": 100 },
//!   "rows": { "vary": "sparsity", "values": [2, 4, 6] },
//!   "m": { "auto": { "low": 0.5, "high": 1.5, "points": 11 } },
//!   "trials": 100
//! }
//! ```
//!
//! `m` may also be an explicit list of measurement counts. Optional fields:
//! `sensing` (default `["po"]`), `success_threshold` (default `1e-3`),
//! `seed`, and `solver` (see [`SolveOptions`]).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::DEFAULT_SEED;
use crate::solvers::SolveOptions;
use crate::thresholds::{
    zeta_hat_po_lowrank_params, zeta_hat_po_sparse_params, zeta_ln_lowrank, zeta_ln_sparse,
};

pub const SWEEP_SCHEMA: &str = "pocs.sweep/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensing {
    /// Phase-only measurements `sign(Φx)` with the linearized recovery.
    Po,
    /// Real Gaussian linear measurements `Ax`.
    Ln,
}

impl Sensing {
    pub fn as_str(self) -> &'static str {
        match self {
            Sensing::Po => "po",
            Sensing::Ln => "ln",
        }
    }

    pub(crate) fn label(self) -> u64 {
        match self {
            Sensing::Po => 1,
            Sensing::Ln => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Problem {
    Sparse { n: usize },
    Lowrank { p: usize, q: usize },
}

impl Problem {
    pub fn dim(&self) -> usize {
        match *self {
            Problem::Sparse { n } => n,
            Problem::Lowrank { p, q } => p * q,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Sparse { .. } => "sparse",
            Problem::Lowrank { .. } => "lowrank",
        }
    }
}

/// What changes from one row of the sweep to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "vary", rename_all = "lowercase", deny_unknown_fields)]
pub enum RowGrid {
    /// Equal-amplitude sparse vectors with the listed sparsities.
    Sparsity { values: Vec<usize> },
    /// `s`-sparse vectors with the listed ℓ1 norms.
    L1 { s: usize, values: Vec<f64> },
    /// Equal-spectrum matrices with the listed ranks.
    Rank { values: Vec<usize> },
    /// Rank-`r` matrices with the listed nuclear norms.
    Nuclear { r: usize, values: Vec<f64> },
}

/// The signal family of one row: sparsity/rank and the ℓ1/nuclear norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowSpec {
    /// `s` for sparse problems, `r` for low-rank ones.
    pub order: usize,
    pub norm_param: f64,
}

impl RowGrid {
    pub fn len(&self) -> usize {
        match self {
            RowGrid::Sparsity { values } | RowGrid::Rank { values } => values.len(),
            RowGrid::L1 { values, .. } | RowGrid::Nuclear { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rows(&self) -> Vec<RowSpec> {
        match self {
            RowGrid::Sparsity { values } | RowGrid::Rank { values } => values
                .iter()
                .map(|&k| RowSpec {
                    order: k,
                    norm_param: (k as f64).sqrt(),
                })
                .collect(),
            RowGrid::L1 { s: k, values } | RowGrid::Nuclear { r: k, values } => values
                .iter()
                .map(|&v| RowSpec {
                    order: *k,
                    norm_param: v,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoGrid {
    #[serde(default = "AutoGrid::default_low")]
    pub low: f64,
    #[serde(default = "AutoGrid::default_high")]
    pub high: f64,
    #[serde(default = "AutoGrid::default_points")]
    pub points: usize,
}

impl AutoGrid {
    fn default_low() -> f64 {
        0.5
    }
    fn default_high() -> f64 {
        1.5
    }
    fn default_points() -> usize {
        11
    }
}

impl Default for AutoGrid {
    fn default() -> Self {
        AutoGrid {
            low: 0.5,
            high: 1.5,
            points: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MGrid {
    List(Vec<usize>),
    Auto { auto: AutoGrid },
}

impl MGrid {
    /// Measurement counts `round(f · theory)` for `f` evenly spaced in
    /// `[low, high]`, deduplicated and at least 1.
    pub fn resolve(&self, theory: f64) -> Vec<usize> {
        match self {
            MGrid::List(ms) => ms.clone(),
            MGrid::Auto { auto } => {
                let k = auto.points.max(1);
                let mut ms: Vec<usize> = (0..k)
                    .map(|i| {
                        let f = if k == 1 {
                            0.5 * (auto.low + auto.high)
                        } else {
                            auto.low + (auto.high - auto.low) * i as f64 / (k - 1) as f64
                        };
                        ((f * theory).round() as usize).max(1)
                    })
                    .collect();
                ms.dedup();
                ms
            }
        }
    }
}

fn default_sensing() -> Vec<Sensing> {
    vec![Sensing::Po]
}

fn default_threshold() -> f64 {
    1e-3
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub name: String,
    pub problem: Problem,
    pub rows: RowGrid,
    pub m: MGrid,
    pub trials: usize,
    #[serde(default = "default_sensing")]
    pub sensing: Vec<Sensing>,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolveOptions,
}

impl ExperimentConfig {
    /// Parses JSON, reporting the failing field path on schema errors.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SWEEP_SCHEMA {
            return Err(Error::config(
                "schema",
                format!("expected \"{SWEEP_SCHEMA}\", got \"{}\"", self.schema),
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config("name", "must be a nonempty file stem"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::config("success_threshold", "must be positive"));
        }
        if self.sensing.is_empty() {
            return Err(Error::config("sensing", "must list at least one model"));
        }
        let mut sorted = self.sensing.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.sensing.len() {
            return Err(Error::config("sensing", "duplicate entries"));
        }
        self.solver
            .validate()
            .map_err(|e| Error::config("solver", e.to_string()))?;
        match &self.m {
            MGrid::List(ms) => {
                if ms.is_empty() {
                    return Err(Error::config("m", "grid is empty"));
                }
                if let Some(i) = ms.iter().position(|&m| m == 0) {
                    return Err(Error::config(format!("m[{i}]"), "measurement counts must be at least 1"));
                }
            }
            MGrid::Auto { auto } => {
                if !(auto.low > 0.0 && auto.high >= auto.low) || auto.points == 0 {
                    return Err(Error::config("m.auto", "need 0 < low <= high and points >= 1"));
                }
            }
        }
        if self.rows.is_empty() {
            return Err(Error::config("rows.values", "grid is empty"));
        }
        self.validate_rows()
    }

    fn validate_rows(&self) -> Result<()> {
        let err = |i: usize, msg: String| Err(Error::config(format!("rows.values[{i}]"), msg));
        match (&self.problem, &self.rows) {
            (Problem::Sparse { n }, RowGrid::Sparsity { values }) => {
                for (i, &s) in values.iter().enumerate() {
                    if s == 0 || s > *n {
                        return err(i, format!("sparsity must lie in [1, {n}]"));
                    }
                }
            }
            (Problem::Sparse { n }, RowGrid::L1 { s, values }) => {
                if *s < 2 || s > n {
                    return Err(Error::config("rows.s", format!("sparsity must lie in [2, {n}]")));
                }
                let max = (*s as f64).sqrt();
                for (i, &v) in values.iter().enumerate() {
                    if !(v > 1.0 && v <= max + 1e-12) {
                        return err(i, format!("l1 norm must lie in (1, {max}]"));
                    }
                }
            }
            (Problem::Lowrank { p, q }, RowGrid::Rank { values }) => {
                if p > q || *p == 0 {
                    return Err(Error::config("problem", "need 0 < p <= q"));
                }
                for (i, &r) in values.iter().enumerate() {
                    if r == 0 || r > *p {
                        return err(i, format!("rank must lie in [1, {p}]"));
                    }
                }
            }
            (Problem::Lowrank { p, q }, RowGrid::Nuclear { r, values }) => {
                if p > q || *p == 0 {
                    return Err(Error::config("problem", "need 0 < p <= q"));
                }
                if *r < 2 || r > p {
                    return Err(Error::config("rows.r", format!("rank must lie in [2, {p}]")));
                }
                let max = (*r as f64).sqrt();
                for (i, &v) in values.iter().enumerate() {
                    if !(v > 1.0 && v <= max + 1e-12) {
                        return err(i, format!("nuclear norm must lie in (1, {max}]"));
                    }
                }
            }
            _ => {
                return Err(Error::config(
                    "rows.vary",
                    format!("row grid does not match a {} problem", self.problem.name()),
                ))
            }
        }
        Ok(())
    }

    /// Theory overlay for one row: `ζ̂_PO` or the linear-CS surrogate.
    pub fn theory(&self, sensing: Sensing, row: RowSpec) -> Result<f64> {
        let v = match (self.problem, sensing) {
            (Problem::Sparse { n }, Sensing::Po) => zeta_hat_po_sparse_params(n, row.order, row.norm_param)?,
            (Problem::Sparse { n }, Sensing::Ln) => zeta_ln_sparse(n, row.order)?,
            (Problem::Lowrank { p, q }, Sensing::Po) => {
                zeta_hat_po_lowrank_params(p, q, row.order, row.norm_param)?
            }
            (Problem::Lowrank { p, q }, Sensing::Ln) => zeta_ln_lowrank(p, q, row.order)?,
        };
        Ok(v.value)
    }

    /// Measurement grid for one row.
    pub fn m_grid(&self, sensing: Sensing, row: RowSpec) -> Result<Vec<usize>> {
        Ok(self.m.resolve(self.theory(sensing, row)?))
    }
}
