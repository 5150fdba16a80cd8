//! Parallel sweeps over `(sensing, row, m)` cells with an append-only
//! journal for resuming.
//!
//! Each completed cell is appended to the journal as one JSON line. The
//! first line holds the config; a journal written for a different config is
//! refused. A truncated final line (from a killed process) is dropped on
//! reopen. Results are sorted by cell before they are written out, so the
//! output does not depend on the worker count or on how often the sweep was
//! interrupted.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Problem, RowGrid, Sensing};
use super::fit::{logistic_fit, trend_statistic, Binomial, TransitionFit};
use super::trial::{run_trial, Cell};
use crate::error::{Error, Result};
use crate::plot::{Marker, Plot, Series, Style};

pub const JOURNAL_SCHEMA: &str = "pocs.journal/1";
pub const CSV_SCHEMA: &str = "pocs.sweep-csv/1";
pub const SUMMARY_SCHEMA: &str = "pocs.sweep-summary/1";

/// Aggregated outcome of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub sensing: Sensing,
    pub row: usize,
    /// Sparsity `s` or rank `r`.
    pub order: usize,
    /// ℓ1 or nuclear norm of the row's signals.
    pub norm_param: f64,
    pub m: usize,
    pub successes: usize,
    pub trials: usize,
    pub non_converged: usize,
}

impl CellRecord {
    pub fn cell(&self) -> Cell {
        Cell {
            sensing: self.sensing,
            row: self.row,
            m: self.m,
        }
    }

    pub fn binomial(&self) -> Binomial {
        Binomial {
            m: self.m,
            successes: self.successes,
            trials: self.trials,
        }
    }
}

/// Fit and theory overlay for one `(sensing, row)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSummary {
    pub sensing: Sensing,
    pub row: usize,
    pub order: usize,
    pub norm_param: f64,
    /// `ζ̂_PO` for phase-only rows, the linear-CS surrogate otherwise.
    pub theory: f64,
    pub fit: TransitionFit,
    /// Cochran–Armitage trend statistic (positive = increasing in `m`).
    pub trend: f64,
    pub trials: usize,
    pub non_converged: usize,
}

impl RowSummary {
    /// Relative deviation `|m50 − theory| / theory`, when `m50` exists.
    pub fn relative_error(&self) -> Option<f64> {
        self.fit.m50().map(|m| (m - self.theory).abs() / self.theory)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub records: Vec<CellRecord>,
    pub rows: Vec<RowSummary>,
}

impl SweepResult {
    pub fn row(&self, sensing: Sensing, row: usize) -> Option<&RowSummary> {
        self.rows.iter().find(|r| r.sensing == sensing && r.row == row)
    }

    pub fn non_converged_rate(&self) -> f64 {
        let total: usize = self.records.iter().map(|r| r.trials).sum();
        let bad: usize = self.records.iter().map(|r| r.non_converged).sum();
        bad as f64 / total.max(1) as f64
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    /// Journal file for incremental persistence and resume.
    pub journal: Option<PathBuf>,
    /// Stop after computing this many new cells (the rest stay pending).
    pub max_new_cells: Option<usize>,
}

/// Every cell of the sweep in canonical order.
pub fn plan_cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for &sensing in &cfg.sensing {
        for (row, spec) in cfg.rows.rows().into_iter().enumerate() {
            for m in cfg.m_grid(sensing, spec)? {
                cells.push(Cell { sensing, row, m });
            }
        }
    }
    cells.sort();
    cells.dedup();
    Ok(cells)
}

/// Runs all trials of one cell.
pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<CellRecord> {
    let spec = cfg.rows.rows()[cell.row];
    let (mut successes, mut non_converged) = (0, 0);
    for t in 0..cfg.trials {
        let out = run_trial(cfg, cell, t)?;
        successes += usize::from(out.success);
        non_converged += usize::from(!out.converged);
    }
    Ok(CellRecord {
        sensing: cell.sensing,
        row: cell.row,
        order: spec.order,
        norm_param: spec.norm_param,
        m: cell.m,
        successes,
        trials: cfg.trials,
        non_converged,
    })
}

#[derive(Serialize, Deserialize)]
struct JournalHeader {
    schema: String,
    config: ExperimentConfig,
}

struct Journal {
    file: Mutex<File>,
}

impl Journal {
    /// Opens (or creates) a journal and returns the records already in it.
    fn open(path: &Path, cfg: &ExperimentConfig) -> Result<(Journal, Vec<CellRecord>)> {
        let mut done = Vec::new();
        let mut keep = String::new();
        if path.exists() {
            let text = fs::read_to_string(path)?;
            // Only newline-terminated lines were written completely.
            let complete = match text.rfind('\n') {
                Some(i) => &text[..=i],
                None => "",
            };
            let mut lines = complete.lines();
            if let Some(first) = lines.next() {
                let header: JournalHeader = serde_json::from_str(first)
                    .map_err(|e| Error::config("journal", format!("unreadable header: {e}")))?;
                if header.schema != JOURNAL_SCHEMA || header.config != *cfg {
                    return Err(Error::config(
                        "journal",
                        format!("{} was written for a different config", path.display()),
                    ));
                }
                keep.push_str(first);
                keep.push('\n');
                for line in lines {
                    match serde_json::from_str::<CellRecord>(line) {
                        Ok(rec) => {
                            done.push(rec);
                            keep.push_str(line);
                            keep.push('\n');
                        }
                        Err(_) => break,
                    }
                }
            }
        }
        if keep.is_empty() {
            let header = JournalHeader {
                schema: JOURNAL_SCHEMA.to_string(),
                config: cfg.clone(),
            };
            keep = serde_json::to_string(&header)? + "\n";
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, &keep)?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok((Journal { file: Mutex::new(file) }, done))
    }

    fn append(&self, rec: &CellRecord) -> Result<()> {
        let line = serde_json::to_string(rec)? + "\n";
        let mut f = self.file.lock().expect("journal lock poisoned");
        f.write_all(line.as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

/// Executes every pending cell of `cfg` and summarizes the rows.
///
/// Returns [`Error::Incomplete`] when `max_new_cells` stops the run early;
/// the journal then holds everything computed so far.
pub fn sweep(cfg: &ExperimentConfig, opts: &SweepOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let cells = plan_cells(cfg)?;
    let (journal, resumed) = match &opts.journal {
        Some(path) => {
            let (j, done) = Journal::open(path, cfg)?;
            (Some(j), done)
        }
        None => (None, Vec::new()),
    };
    let mut records: BTreeMap<Cell, CellRecord> = BTreeMap::new();
    for rec in resumed {
        records.insert(rec.cell(), rec);
    }
    let pending: Vec<Cell> = cells.iter().filter(|c| !records.contains_key(c)).copied().collect();

    let budget = opts.max_new_cells.unwrap_or(usize::MAX);
    let started = AtomicUsize::new(0);
    let work = || -> Result<Vec<CellRecord>> {
        pending
            .par_iter()
            .filter(|_| started.fetch_add(1, Ordering::SeqCst) < budget)
            .map(|cell| {
                let rec = run_cell(cfg, cell)?;
                if let Some(j) = &journal {
                    j.append(&rec)?;
                }
                Ok(rec)
            })
            .collect()
    };
    let fresh = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    for rec in fresh {
        records.insert(rec.cell(), rec);
    }
    if records.len() < cells.len() {
        return Err(Error::Incomplete {
            done: records.len(),
            total: cells.len(),
        });
    }
    summarize(cfg, cells.iter().map(|c| records[c]).collect())
}

/// Fits every `(sensing, row)` of a completed set of records.
pub fn summarize(cfg: &ExperimentConfig, mut records: Vec<CellRecord>) -> Result<SweepResult> {
    records.sort_by_key(|r| r.cell());
    let mut rows = Vec::new();
    for &sensing in &cfg.sensing {
        for (row, spec) in cfg.rows.rows().into_iter().enumerate() {
            let recs: Vec<&CellRecord> = records.iter().filter(|r| r.sensing == sensing && r.row == row).collect();
            if recs.is_empty() {
                continue;
            }
            let points: Vec<Binomial> = recs.iter().map(|r| r.binomial()).collect();
            rows.push(RowSummary {
                sensing,
                row,
                order: spec.order,
                norm_param: spec.norm_param,
                theory: cfg.theory(sensing, spec)?,
                fit: logistic_fit(&points)?,
                trend: trend_statistic(&points),
                trials: recs.iter().map(|r| r.trials).sum(),
                non_converged: recs.iter().map(|r| r.non_converged).sum(),
            });
        }
    }
    Ok(SweepResult {
        schema: SUMMARY_SCHEMA,
        config: cfg.clone(),
        records,
        rows,
    })
}

/// Sweep over a norm grid at fixed sparsity or rank (ℓ1 or nuclear rows).
pub fn amplitude_sweep(cfg: &ExperimentConfig, opts: &SweepOptions) -> Result<SweepResult> {
    if !matches!(cfg.rows, RowGrid::L1 { .. } | RowGrid::Nuclear { .. }) {
        return Err(Error::config("rows.vary", "an amplitude sweep varies \"l1\" or \"nuclear\""));
    }
    sweep(cfg, opts)
}

/// Writes the per-cell CSV. The first line is a `#` comment carrying the
/// schema id.
pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "# schema: {CSV_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "problem",
        "sensing",
        "n",
        "p",
        "q",
        "s",
        "r",
        "norm_param",
        "m",
        "successes",
        "trials",
        "non_converged",
    ])?;
    let problem = result.config.problem;
    for rec in &result.records {
        let (n, p, q, s, r) = match problem {
            Problem::Sparse { n } => (n.to_string(), String::new(), String::new(), rec.order.to_string(), String::new()),
            Problem::Lowrank { p, q } => (
                (p * q).to_string(),
                p.to_string(),
                q.to_string(),
                String::new(),
                rec.order.to_string(),
            ),
        };
        w.write_record([
            problem.name().to_string(),
            rec.sensing.as_str().to_string(),
            n,
            p,
            q,
            s,
            r,
            rec.norm_param.to_string(),
            rec.m.to_string(),
            rec.successes.to_string(),
            rec.trials.to_string(),
            rec.non_converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn row_label(cfg: &ExperimentConfig, sensing: Sensing, order: usize, norm_param: f64) -> String {
    let tag = sensing.as_str().to_uppercase();
    match cfg.rows {
        RowGrid::Sparsity { .. } => format!("{tag} s={order}"),
        RowGrid::Rank { .. } => format!("{tag} r={order}"),
        RowGrid::L1 { .. } | RowGrid::Nuclear { .. } => format!("{tag} norm={norm_param:.3}"),
    }
}

/// Empirical success rate against `m`, one series per `(sensing, row)`, with
/// the predicted transition of each row as a dashed marker.
pub fn success_rate_plot(result: &SweepResult) -> Plot {
    let mut plot = Plot {
        title: format!("{}: success rate", result.config.name),
        x_label: "m".into(),
        y_label: "success rate".into(),
        y_range: Some((0.0, 1.0)),
        ..Default::default()
    };
    for summary in &result.rows {
        let points = result
            .records
            .iter()
            .filter(|r| r.sensing == summary.sensing && r.row == summary.row)
            .map(|r| (r.m as f64, r.successes as f64 / r.trials as f64))
            .collect();
        plot.markers.push(Marker {
            x: summary.theory,
            series: plot.series.len(),
        });
        plot.series.push(Series {
            label: row_label(&result.config, summary.sensing, summary.order, summary.norm_param),
            points,
            style: Style::LineMarkers,
        });
    }
    plot
}

/// Fitted `m50` per row next to the predicted transition, against the row
/// parameter (sparsity, rank or norm).
pub fn transition_plot(result: &SweepResult) -> Plot {
    let cfg = &result.config;
    let by_norm = matches!(cfg.rows, RowGrid::L1 { .. } | RowGrid::Nuclear { .. });
    let x_of = |r: &RowSummary| if by_norm { r.norm_param } else { r.order as f64 };
    let x_label = match cfg.rows {
        RowGrid::Sparsity { .. } => "s",
        RowGrid::Rank { .. } => "r",
        RowGrid::L1 { .. } => "‖x‖₁",
        RowGrid::Nuclear { .. } => "‖X‖_nu",
    };
    let mut plot = Plot {
        title: format!("{}: empirical vs predicted transition", cfg.name),
        x_label: x_label.into(),
        y_label: "m".into(),
        ..Default::default()
    };
    for &sensing in &cfg.sensing {
        let rows: Vec<&RowSummary> = result.rows.iter().filter(|r| r.sensing == sensing).collect();
        let tag = sensing.as_str().to_uppercase();
        plot.series.push(Series {
            label: format!("{tag} m50"),
            points: rows.iter().filter_map(|r| Some((x_of(r), r.fit.m50()?))).collect(),
            style: Style::Markers,
        });
        plot.series.push(Series {
            label: format!("{tag} theory"),
            points: rows.iter().map(|r| (x_of(r), r.theory)).collect(),
            style: Style::Line,
        });
    }
    plot
}

/// Paths of the files written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub transition_svg: PathBuf,
    pub rates_svg: PathBuf,
}

/// Writes `<name>.csv`, `<name>.summary.json`, `<name>.svg` (transition
/// overlay) and `<name>.rates.svg` into `dir`.
pub fn write_outputs(result: &SweepResult, dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let name = &result.config.name;
    let files = OutputFiles {
        csv: dir.join(format!("{name}.csv")),
        summary: dir.join(format!("{name}.summary.json")),
        transition_svg: dir.join(format!("{name}.svg")),
        rates_svg: dir.join(format!("{name}.rates.svg")),
    };
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    fs::write(&files.csv, buf)?;
    fs::write(&files.summary, serde_json::to_string_pretty(result)? + "\n")?;
    fs::write(&files.transition_svg, transition_plot(result).to_svg())?;
    fs::write(&files.rates_svg, success_rate_plot(result).to_svg())?;
    Ok(files)
}
