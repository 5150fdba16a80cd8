//! Command-line front end of the `pocs` binary.
//!
//! Exit codes: 0 on success, 1 on a runtime error, 2 on a usage or config
//! error. Files go to `--out-dir`, which defaults to `$POCS_OUT_DIR` and
//! then to `pocs-out`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::curves::{CurveConfig, CurveSpec, Family, UGrid, CURVE_SCHEMA};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig, SweepOptions};
use crate::measurement::{near_gaussianity_diagnostics_seeded, DiagnosticReport};
use crate::rng::{self, purpose, DEFAULT_SEED};
use crate::signals::{make_lowrank_with_nuclear, make_sparse_with_l1, Signal};
use crate::thresholds::{
    zeta_hat_po_lowrank_params, zeta_hat_po_monte_carlo, zeta_hat_po_sparse_params, zeta_ln_lowrank,
    zeta_ln_sparse, McPlan, ThresholdResult,
};

pub const OUT_DIR_ENV: &str = "POCS_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "pocs-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pocs", version, about = "Phase-only compressed sensing toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Master seed for every random stream [default: 6523283718341, or the
    /// seed stored in a sweep config].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, created if absent.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// More progress output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// No progress output.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predicted transitions for one signal family, as JSON on stdout.
    Threshold {
        #[command(subcommand)]
        problem: ThresholdProblem,
    },
    /// Ratio curves ζ̂_PO / ζ̂_LN over u, written as CSV and SVG.
    RatioCurve(RatioCurveArgs),
    /// Monte Carlo phase-transition sweep from a JSON config.
    Sweep(SweepArgs),
    /// Near-Gaussianity diagnostics of the rotated linearized system.
    Diagnose(DiagnoseArgs),
    /// Prints the version and the schema ids this build reads and writes.
    Version,
}

#[derive(Debug, Subcommand)]
pub enum ThresholdProblem {
    /// s-sparse unit vector in R^n with a given ℓ1 norm.
    Sparse {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        l1: f64,
        /// Also estimate ζ̂_PO by Monte Carlo with this many samples.
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// Rank-r unit-Frobenius p×q matrix with a given nuclear norm.
    Lowrank {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        nuc: f64,
        #[arg(long)]
        mc_samples: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct RatioCurveArgs {
    /// Curve config (JSON); the flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "sp")]
    pub family: Family,
    /// `‖x‖₁²/s` for sp, aspect ratio `p/q` for lr.
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    /// `‖X‖²_nu / r` (lr only).
    #[arg(long, default_value_t = 1.0)]
    pub w: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub u_min: f64,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
    /// Output file stem.
    #[arg(long, default_value = "ratio")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Ignore an existing journal and start over.
    #[arg(long)]
    pub fresh: bool,
    /// Compute at most this many new cells, then stop (resume later).
    #[arg(long)]
    pub max_cells: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

/// Stdout payload of `pocs threshold`.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub problem: &'static str,
    pub params: serde_json::Value,
    pub zeta_po_hat: f64,
    pub zeta_ln_hat: f64,
    pub ratio: f64,
    pub tau_star: f64,
    pub po: ThresholdResult,
    pub ln: ThresholdResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<ThresholdResult>,
}

fn report(
    problem: &'static str,
    params: serde_json::Value,
    po: ThresholdResult,
    ln: ThresholdResult,
    monte_carlo: Option<ThresholdResult>,
) -> ThresholdReport {
    ThresholdReport {
        problem,
        params,
        zeta_po_hat: po.value,
        zeta_ln_hat: ln.value,
        ratio: po.value / ln.value,
        tau_star: po.tau_star,
        po,
        ln,
        monte_carlo,
    }
}

/// Report for an s-sparse signal; the Monte Carlo estimate (if requested)
/// uses one signal drawn from the `seed` stream.
pub fn sparse_threshold(n: usize, s: usize, l1: f64, mc_samples: Option<usize>, seed: u64) -> Result<ThresholdReport> {
    let po = zeta_hat_po_sparse_params(n, s, l1)?;
    let ln = zeta_ln_sparse(n, s)?;
    let mc = match mc_samples {
        Some(k) => {
            let mut g = rng::stream(seed, &[purpose::SIGNAL]);
            let x = make_sparse_with_l1(n, s, l1, &mut g)?;
            Some(zeta_hat_po_monte_carlo(&Signal::Sparse(x), McPlan::new(k), seed)?)
        }
        None => None,
    };
    Ok(report("sparse", serde_json::json!({ "n": n, "s": s, "l1": l1 }), po, ln, mc))
}

pub fn lowrank_threshold(
    p: usize,
    q: usize,
    r: usize,
    nuc: f64,
    mc_samples: Option<usize>,
    seed: u64,
) -> Result<ThresholdReport> {
    let po = zeta_hat_po_lowrank_params(p, q, r, nuc)?;
    let ln = zeta_ln_lowrank(p, q, r)?;
    let mc = match mc_samples {
        Some(k) => {
            let mut g = rng::stream(seed, &[purpose::SIGNAL]);
            let x = make_lowrank_with_nuclear(p, q, r, nuc, &mut g)?;
            Some(zeta_hat_po_monte_carlo(&Signal::LowRank(x), McPlan::new(k), seed)?)
        }
        None => None,
    };
    Ok(report("lowrank", serde_json::json!({ "p": p, "q": q, "r": r, "nuc": nuc }), po, ln, mc))
}

/// Curve config equivalent to the `ratio-curve` flags.
pub fn curve_config_from_flags(a: &RatioCurveArgs) -> CurveConfig {
    CurveConfig {
        schema: CURVE_SCHEMA.into(),
        name: a.name.clone(),
        family: a.family,
        u: UGrid::Log {
            min: a.u_min,
            max: 1.0,
            points: a.points,
        },
        curves: vec![CurveSpec {
            label: "ratio".into(),
            v: Some(a.v),
            w: (a.family == Family::Lr).then_some(a.w),
            l1_mix: None,
        }],
    }
}

/// Files written by `ratio-curve`.
#[derive(Debug, Clone)]
pub struct CurveFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

pub fn write_ratio_curves(cfg: &CurveConfig, dir: &Path) -> Result<CurveFiles> {
    let table = cfg.evaluate()?;
    fs::create_dir_all(dir)?;
    let files = CurveFiles {
        csv: dir.join(format!("{}.csv", cfg.name)),
        svg: dir.join(format!("{}.svg", cfg.name)),
    };
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    fs::write(&files.csv, buf)?;
    let log_x = matches!(cfg.u, UGrid::Log { .. });
    fs::write(&files.svg, table.plot(&cfg.name, log_x).to_svg())?;
    Ok(files)
}

/// Diagnostics report plus the three pass/fail checks.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnoseOutput {
    #[serde(flatten)]
    pub report: DiagnosticReport,
    pub l_mean_ok: bool,
    pub variance_rel_errors: (f64, f64),
    pub variance_ok: bool,
    pub ks_ok: bool,
}

pub fn diagnose(n: usize, m: usize, trials: usize, seed: u64) -> Result<DiagnoseOutput> {
    let report = near_gaussianity_diagnostics_seeded(n, m, trials, seed)?;
    let rel = report.variance_rel_errors();
    Ok(DiagnoseOutput {
        l_mean_ok: report.l_mean_ok(),
        variance_rel_errors: rel,
        variance_ok: rel.0 <= 0.1 && rel.1 <= 0.1,
        ks_ok: report.ks_distance <= report.ks_critical_1pct,
        report,
    })
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidArgument(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

struct Ctx<'a> {
    g: &'a GlobalArgs,
}

impl Ctx<'_> {
    fn info(&self, msg: impl AsRef<str>) {
        if !self.g.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn debug(&self, msg: impl AsRef<str>) {
        if self.g.verbose > 0 {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let ctx = Ctx { g: &cli.global };
    let seed = cli.global.seed.unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Threshold { problem } => {
            let rep = match *problem {
                ThresholdProblem::Sparse { n, s, l1, mc_samples } => sparse_threshold(n, s, l1, mc_samples, seed)?,
                ThresholdProblem::Lowrank { p, q, r, nuc, mc_samples } => {
                    lowrank_threshold(p, q, r, nuc, mc_samples, seed)?
                }
            };
            print_json(&rep)
        }
        Command::RatioCurve(a) => {
            let cfg = match &a.config {
                Some(path) => CurveConfig::from_file(path)?,
                None => curve_config_from_flags(a),
            };
            let files = write_ratio_curves(&cfg, &cli.global.out_dir)?;
            ctx.info(format!("wrote {}", files.csv.display()));
            ctx.info(format!("wrote {}", files.svg.display()));
            Ok(())
        }
        Command::Sweep(a) => {
            let mut cfg = ExperimentConfig::from_file(&a.config)?;
            if let Some(s) = cli.global.seed {
                cfg.seed = s;
            }
            fs::create_dir_all(&cli.global.out_dir)?;
            let journal = cli.global.out_dir.join(format!("{}.journal.jsonl", cfg.name));
            if a.fresh && journal.exists() {
                fs::remove_file(&journal)?;
            }
            ctx.debug(format!(
                "{}: {} cells x {} trials, journal {}",
                cfg.name,
                experiments::plan_cells(&cfg)?.len(),
                cfg.trials,
                journal.display()
            ));
            let opts = SweepOptions {
                workers: cli.global.workers,
                journal: Some(journal),
                max_new_cells: a.max_cells,
            };
            let result = experiments::sweep(&cfg, &opts)?;
            let files = experiments::write_outputs(&result, &cli.global.out_dir)?;
            for r in &result.rows {
                let m50 = r.fit.m50().map_or("-".to_string(), |m| format!("{m:.2}"));
                ctx.debug(format!(
                    "{} row {}: m50 {m50}, theory {:.2}",
                    r.sensing.as_str(),
                    r.row,
                    r.theory
                ));
            }
            for p in [&files.csv, &files.summary, &files.transition_svg, &files.rates_svg] {
                ctx.info(format!("wrote {}", p.display()));
            }
            Ok(())
        }
        Command::Diagnose(a) => print_json(&diagnose(a.n, a.m, a.trials, seed)?),
        Command::Version => {
            println!("pocs {}", env!("CARGO_PKG_VERSION"));
            println!("sweep config   {}", experiments::SWEEP_SCHEMA);
            println!("curve config   {CURVE_SCHEMA}");
            println!("sweep csv      {}", experiments::sweep::CSV_SCHEMA);
            println!("sweep summary  {}", experiments::sweep::SUMMARY_SCHEMA);
            println!("journal        {}", experiments::sweep::JOURNAL_SCHEMA);
            Ok(())
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_flags_are_config_errors() {
        assert_eq!(run(["pocs", "threshold", "sparse", "--n", "10"]), EXIT_CONFIG);
        assert_eq!(run(["pocs", "nonsense"]), EXIT_CONFIG);
        assert_eq!(run(["pocs", "threshold", "sparse", "--n", "10", "--s", "2", "--l1", "5"]), EXIT_CONFIG);
    }

    #[test]
    fn version_and_help_exit_zero() {
        assert_eq!(run(["pocs", "version"]), EXIT_OK);
        assert_eq!(run(["pocs", "--help"]), EXIT_OK);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::config("a", "b")), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Incomplete { done: 1, total: 2 }), EXIT_RUNTIME);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_RUNTIME);
    }
}
