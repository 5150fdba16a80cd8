//! Ratio curves `ζ̂_PO / ζ̂_LN` over the sparsity/rank ratio.
//!
//! A curve file looks like
//!
//! ```json
//! {
//!   "schema": "pocs.ratio-curve/1",
//!   "name": "ratio-sparse",
//!   "family": "sp",
//!   "u": { "log": { "min": 0.001, "max": 1.0, "points": 121 } },
//!   "curves": [ { "label": "v=1", "v": 1.0 }, { "label": "v=0.6", "v": 0.6 } ]
//! }
//! ```
//!
//! For `"family": "lr"` each curve also carries `w` (`‖X‖²_nu / r`) and `v`
//! is the aspect ratio `p/q`. The grid `{"sparsity": {"n": 1000}}` walks
//! `u = s/n` for `s = 1..n`, and a sparse curve may give `l1_mix = a`
//! instead of `v`, meaning `‖x‖₁ = a√s + 1 − a`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plot::{Plot, Series, Style};
use crate::thresholds::{ratio_lr, ratio_sp};

pub const CURVE_SCHEMA: &str = "pocs.ratio-curve/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `R_sp(u, v) = ψ(u, v) / ψ1(u)`.
    Sp,
    /// `R_lr(u, v, w) = Ψ(u, v, w) / Ψ1(u, v)`.
    Lr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum UGrid {
    /// Log-spaced `u` from `min` to `max`.
    Log { min: f64, max: f64, points: usize },
    /// `u = s/n` for `s = 1..=n`.
    Sparsity { n: usize },
}

impl UGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            UGrid::Log { min, max, points } => {
                if !(min > 0.0 && max <= 1.0 && min <= max) || points == 0 {
                    return Err(Error::config("u.log", "need 0 < min <= max <= 1 and points >= 1"));
                }
                if points == 1 {
                    return Ok(vec![min]);
                }
                let (a, b) = (min.ln(), max.ln());
                Ok((0..points)
                    .map(|i| {
                        if i == 0 {
                            min
                        } else if i + 1 == points {
                            max
                        } else {
                            (a + (b - a) * i as f64 / (points - 1) as f64).exp()
                        }
                    })
                    .collect())
            }
            UGrid::Sparsity { n } => {
                if n == 0 {
                    return Err(Error::config("u.sparsity.n", "must be positive"));
                }
                Ok((1..=n).map(|s| s as f64 / n as f64).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_mix: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub schema: String,
    pub name: String,
    pub family: Family,
    pub u: UGrid,
    pub curves: Vec<CurveSpec>,
}

/// Evaluated curves: `rows[i] = (u_i, [ratio of each curve at u_i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub labels: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl CurveConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: CurveConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::config(e.path().to_string(), e.into_inner().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CURVE_SCHEMA {
            return Err(Error::config(
                "schema",
                format!("expected \"{CURVE_SCHEMA}\", got \"{}\"", self.schema),
            ));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config("name", "must be a nonempty file stem"));
        }
        if self.curves.is_empty() {
            return Err(Error::config("curves", "need at least one curve"));
        }
        self.u.values()?;
        for (i, c) in self.curves.iter().enumerate() {
            let path = |f: &str| format!("curves[{i}].{f}");
            let unit = |x: f64| x > 0.0 && x <= 1.0;
            match self.family {
                Family::Sp => {
                    if c.w.is_some() {
                        return Err(Error::config(path("w"), "only used by the lr family"));
                    }
                    match (c.v, c.l1_mix) {
                        (Some(v), None) if unit(v) => {}
                        (None, Some(a)) if (0.0..=1.0).contains(&a) => {
                            if !matches!(self.u, UGrid::Sparsity { .. }) {
                                return Err(Error::config(path("l1_mix"), "needs a sparsity grid for u"));
                            }
                        }
                        _ => return Err(Error::config(path("v"), "give v in (0, 1] or l1_mix in [0, 1]")),
                    }
                }
                Family::Lr => {
                    if c.l1_mix.is_some() {
                        return Err(Error::config(path("l1_mix"), "only used by the sp family"));
                    }
                    if !c.v.is_some_and(unit) {
                        return Err(Error::config(path("v"), "aspect ratio must lie in (0, 1]"));
                    }
                    if !c.w.is_some_and(|w| (0.0..=1.0).contains(&w)) {
                        return Err(Error::config(path("w"), "must lie in [0, 1]"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluates every curve on the `u` grid.
    pub fn evaluate(&self) -> Result<CurveTable> {
        self.validate()?;
        let us = self.u.values()?;
        let n = match self.u {
            UGrid::Sparsity { n } => Some(n),
            UGrid::Log { .. } => None,
        };
        let mut rows = Vec::with_capacity(us.len());
        for &u in &us {
            let mut vals = Vec::with_capacity(self.curves.len());
            for c in &self.curves {
                let r = match self.family {
                    Family::Sp => {
                        let v = match (c.v, c.l1_mix, n) {
                            (Some(v), _, _) => v,
                            (None, Some(a), Some(n)) => {
                                let s = (u * n as f64).round();
                                let l1 = a * s.sqrt() + 1.0 - a;
                                (l1 * l1 / s).min(1.0)
                            }
                            _ => unreachable!("validated"),
                        };
                        ratio_sp(u, v)?
                    }
                    Family::Lr => ratio_lr(u, c.v.expect("validated"), c.w.expect("validated"))?,
                };
                vals.push(r);
            }
            rows.push((u, vals));
        }
        Ok(CurveTable {
            labels: self.curves.iter().map(|c| c.label.clone()).collect(),
            rows,
        })
    }
}

impl CurveTable {
    /// CSV with a `u` column followed by one column per curve.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["u".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (u, vals) in &self.rows {
            let mut rec = vec![u.to_string()];
            rec.extend(vals.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn plot(&self, title: &str, log_x: bool) -> Plot {
        Plot {
            title: title.to_string(),
            x_label: "u".into(),
            y_label: "ζ̂_PO / ζ̂_LN".into(),
            log_x,
            y_range: None,
            series: self
                .labels
                .iter()
                .enumerate()
                .map(|(i, label)| Series {
                    label: label.clone(),
                    points: self.rows.iter().map(|(u, v)| (*u, v[i])).collect(),
                    style: Style::Line,
                })
                .collect(),
            markers: Vec::new(),
        }
    }
}
