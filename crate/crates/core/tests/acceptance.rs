//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.
//!
//! The low-rank half of the amplitude check takes hours on a laptop and only
//! runs with `POCS_ACCEPTANCE_SLOW=1`.

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use pocs::experiments::{sweep, write_csv, ExperimentConfig, Sensing, SweepOptions, SweepResult};
use pocs::measurement::{build_linearized, householder_px, near_gaussianity_diagnostics_seeded, phases, sample_phi};
use pocs::quad::integrate;
use pocs::rng::{stream, DEFAULT_SEED};
use pocs::signals::{make_equal_amplitude_sparse, make_lowrank_with_nuclear, make_sparse_with_l1, Signal};
use pocs::thresholds::lowrank::{mp_moment, MPParams};
use pocs::thresholds::{
    psi, psi1, psi_lr, psi_lr1, ratio_lr, ratio_sp, shrink_second_moment, zeta_hat_po_lowrank,
    zeta_hat_po_monte_carlo, zeta_hat_po_sparse, zeta_ln_sparse, McPlan,
};

struct Report {
    passed: usize,
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    }

    fn skip(&self, id: &str, why: &str) {
        println!("SKIP criterion {id}: {why}");
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn criterion_1(rep: &mut Report) {
    let t0 = Instant::now();
    let cases = [
        ("1a R_sp(1e-3,1)", ratio_sp(1e-3, 1.0).unwrap(), 0.678),
        ("1b R_sp(1e-3,0.6)", ratio_sp(1e-3, 0.6).unwrap(), 0.808),
        ("1c R_lr(1e-3,1,1)", ratio_lr(1e-3, 1.0, 1.0).unwrap(), 0.758),
        ("1d R_lr(1e-3,1,0.6)", ratio_lr(1e-3, 1.0, 0.6).unwrap(), 0.856),
    ];
    let elapsed = t0.elapsed();
    for (id, got, want) in cases {
        rep.line(
            id,
            (got - want).abs() <= 0.02 && elapsed < Duration::from_secs(5),
            format!("{got:.4} vs {want} +- 0.02 ({:.3}s)", secs(elapsed)),
        );
    }
}

fn criterion_2(rep: &mut Report) {
    let t0 = Instant::now();
    let mut rng = stream(DEFAULT_SEED, &[2]);
    let x = make_equal_amplitude_sparse(1000, 1, None, &mut rng).unwrap();
    let ratio = zeta_hat_po_sparse(&x).unwrap().value / zeta_ln_sparse(1000, 1).unwrap().value;
    let elapsed = t0.elapsed();
    rep.line(
        "2",
        ratio < 0.75 && elapsed < Duration::from_secs(1),
        format!("zeta_po/zeta_ln = {ratio:.4} < 0.75 ({:.3}s)", secs(elapsed)),
    );
}

fn criterion_3(rep: &mut Report) {
    let mut worst_sp = f64::NEG_INFINITY;
    for i in 1..=20 {
        let u = i as f64 / 21.0;
        let p1 = psi1(u).unwrap().value;
        for j in 1..=5 {
            let v = j as f64 / 5.0;
            worst_sp = worst_sp.max(psi(u, v).unwrap().value - p1);
        }
    }
    let mut worst_lr = f64::NEG_INFINITY;
    for i in 1..=10 {
        let rho = i as f64 / 10.0;
        for nu in [0.25, 0.6, 1.0] {
            let p1 = psi_lr1(rho, nu).unwrap().value;
            for mu in [0.3, 0.7, 1.0] {
                worst_lr = worst_lr.max(psi_lr(rho, nu, mu).unwrap().value - p1);
            }
        }
    }
    rep.line(
        "3",
        worst_sp <= 1e-9 && worst_lr <= 1e-9,
        format!("max psi - psi1 = {worst_sp:.2e}, max Psi - Psi1 = {worst_lr:.2e} (<= 1e-9)"),
    );
}

fn criterion_4(rep: &mut Report) {
    let t0 = Instant::now();
    let phi = |w: f64| (-0.5 * w * w).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut shrink_err = 0.0f64;
    for i in 0..=30 {
        let tau = 0.2 * i as f64;
        let quad = 2.0 * integrate(|w| (w - tau) * (w - tau) * phi(w), tau, tau + 40.0, 1e-14).value;
        shrink_err = shrink_err.max((shrink_second_moment(tau).unwrap() - quad).abs());
    }
    let (mut mass_err, mut m0_err) = (0.0f64, 0.0f64);
    for y in [0.1, 0.25, 0.5, 1.0] {
        let p = MPParams::new(y).unwrap();
        mass_err = mass_err.max((p.total_mass() - 1.0).abs());
        m0_err = m0_err.max((mp_moment(&p, 0.0).unwrap() - 1.0).abs());
    }
    let elapsed = t0.elapsed();
    rep.line(
        "4",
        shrink_err < 1e-10 && mass_err <= 1e-9 && m0_err <= 1e-8 && elapsed < Duration::from_secs(5),
        format!(
            "shrink |diff| {shrink_err:.1e}, MP mass err {mass_err:.1e}, mp_moment(y,0) err {m0_err:.1e} ({:.2}s)",
            secs(elapsed)
        ),
    );
}

fn criterion_5(rep: &mut Report) {
    let t0 = Instant::now();
    let mut rng = stream(DEFAULT_SEED, &[5]);
    let mut ok = true;
    let mut parts = Vec::new();
    for l1 in [10f64.sqrt(), 2.0] {
        let x = make_sparse_with_l1(200, 10, l1, &mut rng).unwrap();
        let exact = zeta_hat_po_sparse(&x).unwrap().value;
        let mc = zeta_hat_po_monte_carlo(&Signal::Sparse(x), McPlan::new(10_000), DEFAULT_SEED).unwrap();
        let z = (mc.value - exact).abs() / mc.error_estimate;
        ok &= z <= 3.0;
        parts.push(format!("l1={l1:.3}: {:.3} vs {exact:.3} ({z:.2} SE)", mc.value));
    }
    for nuc in [1.1, SQRT_2] {
        let x = make_lowrank_with_nuclear(20, 20, 2, nuc, &mut rng).unwrap();
        let exact = zeta_hat_po_lowrank(&x).unwrap().value;
        let mc = zeta_hat_po_monte_carlo(&Signal::LowRank(x), McPlan::new(4_000), DEFAULT_SEED).unwrap();
        let rel = (mc.value - exact).abs() / exact;
        ok &= rel <= 0.05;
        parts.push(format!("nuc={nuc:.3}: {:.2} vs {exact:.2} ({:.2}%)", mc.value, 100.0 * rel));
    }
    let elapsed = t0.elapsed();
    rep.line(
        "5",
        ok && elapsed < Duration::from_secs(120),
        format!("{} ({:.1}s)", parts.join("; "), secs(elapsed)),
    );
}

fn sweep_config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).expect("acceptance config")
}

fn sparsity_sweep_config() -> ExperimentConfig {
    sweep_config(
        r#"{"schema":"pocs.sweep/1","name":"acceptance-6","problem":{"kind":"sparse","n":100},
            "rows":{"vary":"sparsity","values":[2,4,6,8,10]},
            "m":{"auto":{"low":0.5,"high":1.5,"points":11}},"trials":100}"#,
    )
}

fn csv_bytes(res: &SweepResult) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(res, &mut buf).unwrap();
    buf
}

fn fmt_m50(r: &pocs::experiments::RowSummary) -> String {
    r.fit.m50().map_or("none".into(), |m| format!("{m:.2}"))
}

fn criterion_6_and_10(rep: &mut Report) {
    let cfg = sparsity_sweep_config();
    let t0 = Instant::now();
    let res = sweep(&cfg, &SweepOptions::default()).unwrap();
    let elapsed = t0.elapsed();
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &res.rows {
        let theory = 100.0 * psi(r.order as f64 / 100.0, 1.0).unwrap().value;
        let rel = r.fit.m50().map(|m| (m - theory).abs() / theory);
        ok &= rel.is_some_and(|e| e <= 0.15);
        parts.push(format!(
            "s={}: m50 {} vs {theory:.2} ({})",
            r.order,
            fmt_m50(r),
            rel.map_or("n/a".into(), |e| format!("{:.1}%", 100.0 * e))
        ));
    }
    let nc = res.non_converged_rate();
    ok &= nc < 0.01;
    rep.line(
        "6",
        ok,
        format!("{}; non-converged {:.4} ({:.1}s)", parts.join(", "), nc, secs(elapsed)),
    );

    let reference = csv_bytes(&res);
    let mut same = true;
    for workers in [1, 2] {
        let opts = SweepOptions {
            workers: Some(workers),
            ..Default::default()
        };
        same &= csv_bytes(&sweep(&cfg, &opts).unwrap()) == reference;
    }
    rep.line(
        "10",
        same,
        format!("CSV of run 6 with default, 1 and 2 workers byte-identical: {same}"),
    );
}

/// `m50` nonincreasing along the rows, allowing any pair whose intervals overlap.
fn nonincreasing(res: &SweepResult) -> (bool, String) {
    let rows: Vec<_> = res.rows.iter().filter(|r| r.sensing == Sensing::Po).collect();
    let mut ok = true;
    for w in rows.windows(2) {
        let (a, b) = (w[0], w[1]);
        let drop = match (a.fit.m50(), b.fit.m50()) {
            (Some(x), Some(y)) => y <= x,
            _ => false,
        };
        let (alo, ahi) = a.fit.interval();
        let (blo, bhi) = b.fit.interval();
        let overlap = alo <= bhi && blo <= ahi;
        ok &= drop || overlap;
    }
    let desc = rows
        .iter()
        .map(|r| {
            let (lo, hi) = r.fit.interval();
            format!("{:.3}: {} [{lo:.1}, {hi:.1}]", r.norm_param, fmt_m50(r))
        })
        .collect::<Vec<_>>()
        .join(", ");
    (ok, desc)
}

fn criterion_7(rep: &mut Report) {
    let cfg = sweep_config(
        r#"{"schema":"pocs.sweep/1","name":"acceptance-7a","problem":{"kind":"sparse","n":300},
            "rows":{"vary":"l1","s":9,"values":[1.1,2.0,3.0]},
            "m":{"auto":{"low":0.5,"high":1.5,"points":11}},"trials":50}"#,
    );
    let t0 = Instant::now();
    let res = sweep(&cfg, &SweepOptions::default()).unwrap();
    let (ok, desc) = nonincreasing(&res);
    rep.line("7a", ok, format!("sparse n=300 s=9, l1 -> m50: {desc} ({:.1}s)", secs(t0.elapsed())));

    if std::env::var("POCS_ACCEPTANCE_SLOW").as_deref() != Ok("1") {
        rep.skip("7b", "low-rank slow suite; set POCS_ACCEPTANCE_SLOW=1");
        return;
    }
    let cfg = sweep_config(
        r#"{"schema":"pocs.sweep/1","name":"acceptance-7b","problem":{"kind":"lowrank","p":30,"q":30},
            "rows":{"vary":"nuclear","r":2,"values":[1.05,1.2,1.4142135623730951]},
            "m":{"auto":{"low":0.5,"high":1.5,"points":11}},"trials":50}"#,
    );
    let t0 = Instant::now();
    let res = sweep(&cfg, &SweepOptions::default()).unwrap();
    let (ok, desc) = nonincreasing(&res);
    rep.line("7b", ok, format!("lowrank 30x30 r=2, nuc -> m50: {desc} ({:.1}s)", secs(t0.elapsed())));
}

fn criterion_8(rep: &mut Report) {
    let cfg = sweep_config(
        r#"{"schema":"pocs.sweep/1","name":"acceptance-8","problem":{"kind":"sparse","n":100},
            "rows":{"vary":"sparsity","values":[5]},
            "m":{"auto":{"low":0.5,"high":1.5,"points":11}},"trials":100,"sensing":["po","ln"]}"#,
    );
    let t0 = Instant::now();
    let res = sweep(&cfg, &SweepOptions::default()).unwrap();
    let po = res.row(Sensing::Po, 0).unwrap();
    let ln = res.row(Sensing::Ln, 0).unwrap();
    let (plo, phi) = po.fit.interval();
    let (llo, lhi) = ln.fit.interval();
    let ok = matches!((po.fit.m50(), ln.fit.m50()), (Some(a), Some(b)) if a < b) && phi < llo;
    rep.line(
        "8",
        ok && t0.elapsed() < Duration::from_secs(1800),
        format!(
            "m50 PO {} [{plo:.2}, {phi:.2}] vs LN {} [{llo:.2}, {lhi:.2}] ({:.1}s)",
            fmt_m50(po),
            fmt_m50(ln),
            secs(t0.elapsed())
        ),
    );
}

fn criterion_9(rep: &mut Report) {
    let mut worst_residual = 0.0f64;
    let mut worst_orth = 0.0f64;
    for k in 0..100u64 {
        let mut rng = stream(DEFAULT_SEED, &[9, k]);
        let n = 5 + (k as usize % 40);
        let m = 1 + (k as usize * 7 % 80);
        let x = make_equal_amplitude_sparse(n, 1 + (k as usize % n), None, &mut rng).unwrap().to_dense();
        let phi = sample_phi(m, n, &mut rng).unwrap();
        let l1: f64 = phi.apply(&x).unwrap().iter().map(|c| c.norm()).sum();
        let xs = DVector::from_iterator(n, x.iter().map(|v| v * m as f64 / l1));
        let sys = build_linearized(&phi, &phases(&phi, &x).unwrap()).unwrap();
        worst_residual = worst_residual.max((&sys.matrix * xs - &sys.rhs).amax());
        let p = householder_px(&x).unwrap();
        worst_orth = worst_orth.max((&p * p.transpose() - DMatrix::identity(n, n)).amax());
    }
    let diag = near_gaussianity_diagnostics_seeded(20, 40, 500, DEFAULT_SEED).unwrap();
    rep.line(
        "9",
        worst_residual < 1e-10 && diag.zero_block_ok && worst_orth < 1e-12,
        format!(
            "A_z x* - e1 max {worst_residual:.1e}, zero block max {:.1e} over {} trials, householder orth {worst_orth:.1e}",
            diag.zero_block_max_abs, diag.trials
        ),
    );
}

fn main() {
    // libtest flags (e.g. --nocapture, filters) are accepted and ignored.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut rep = Report { passed: 0, failed: 0 };
    criterion_1(&mut rep);
    criterion_2(&mut rep);
    criterion_3(&mut rep);
    criterion_4(&mut rep);
    criterion_5(&mut rep);
    criterion_6_and_10(&mut rep);
    criterion_7(&mut rep);
    criterion_8(&mut rep);
    criterion_9(&mut rep);
    println!("acceptance: {} passed, {} failed", rep.passed, rep.failed);
    if rep.failed > 0 {
        std::process::exit(1);
    }
}
