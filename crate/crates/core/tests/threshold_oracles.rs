//! Threshold formulas against brute-force oracles built only from the
//! definitions: composite Simpson quadrature and dense τ grids.

use std::f64::consts::PI;

use pocs::thresholds::lowrank::{mp_moment, residual_aspect, MPParams};
use pocs::thresholds::{psi, psi1, psi_lr, psi_lr1, shrink_second_moment};

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn phi(w: f64) -> f64 {
    (-0.5 * w * w).exp() / (2.0 * PI).sqrt()
}

/// `E[shrink(g; τ)²] = 2 ∫_τ^∞ (w − τ)² φ(w) dw`.
fn shrink2_oracle(tau: f64) -> f64 {
    2.0 * simpson(|w| (w - tau) * (w - tau) * phi(w), tau, tau + 14.0, 20_000)
}

/// `∫ (b − τ)² φ_y(b) db` over `[max(a₋, τ), a₊]` with the density written
/// straight from its definition, integrated in `t` where
/// `b = lo + (a₊ − lo)(1 − cos t)/2` to tame the square-root edges.
fn mp_oracle(y: f64, tau: f64) -> f64 {
    let (am, ap) = (1.0 - y.sqrt(), 1.0 + y.sqrt());
    let lo = am.max(tau);
    if lo >= ap {
        return 0.0;
    }
    let density = |b: f64| {
        let v = (b * b - am * am) * (ap * ap - b * b);
        if v <= 0.0 || b <= 0.0 {
            0.0
        } else {
            v.sqrt() / (PI * y * b)
        }
    };
    simpson(
        |t| {
            let b = lo + (ap - lo) * 0.5 * (1.0 - t.cos());
            let db = (ap - lo) * 0.5 * t.sin();
            (b - tau) * (b - tau) * density(b) * db
        },
        0.0,
        PI,
        40_000,
    )
}

/// Minimizes `f` on `[0, hi]`: dense grid, then golden section around the
/// best grid point.
fn grid_min<F: Fn(f64) -> f64>(f: F, hi: f64, points: usize) -> (f64, f64) {
    let h = hi / points as f64;
    let (mut best_t, mut best) = (0.0, f(0.0));
    for i in 1..=points {
        let t = i as f64 * h;
        let v = f(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    let (mut a, mut b) = ((best_t - h).max(0.0), best_t + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t).min(best))
}

#[test]
fn shrink_moment_matches_quadrature() {
    for i in 0..=40 {
        let tau = 0.15 * i as f64;
        let exact = shrink_second_moment(tau).unwrap();
        let oracle = shrink2_oracle(tau);
        assert!((exact - oracle).abs() < 1e-10, "tau={tau}: {exact} vs {oracle}");
    }
}

#[test]
fn psi1_at_tenth_matches_dense_grid() {
    let u = 0.1;
    let (t, v) = grid_min(|t| u * (1.0 + t * t) + (1.0 - u) * shrink2_oracle(t), 6.0, 600);
    let r = psi1(u).unwrap();
    assert!((r.value - v).abs() < 1e-8, "{} vs {v}", r.value);
    assert!((r.tau_star - t).abs() < 1e-4, "{} vs {t}", r.tau_star);
}

#[test]
fn psi_matches_dense_grid() {
    for (u, v) in [(0.05, 1.0), (0.3, 0.6), (0.5, 0.2)] {
        let k = 1.0 - v * (1.0 - 2.0 / PI);
        let (_, oracle) = grid_min(|t| u * (1.0 + k * t * t) + (1.0 - u) * shrink2_oracle(t), 6.0, 300);
        let got = psi(u, v).unwrap().value;
        assert!((got - oracle).abs() < 1e-8, "u={u} v={v}: {got} vs {oracle}");
    }
}

#[test]
fn mp_moment_matches_b_space_quadrature() {
    for y in [0.1, 0.25, 0.5, 1.0] {
        let p = MPParams::new(y).unwrap();
        for tau in [0.0, 0.3, 0.9, 1.4, 1.9] {
            let got = mp_moment(&p, tau).unwrap();
            let oracle = mp_oracle(y, tau);
            assert!((got - oracle).abs() < 1e-7, "y={y} tau={tau}: {got} vs {oracle}");
        }
        // Zeroth moment: total mass.
        let mass = simpson(
            |t| {
                let (am, ap) = (1.0 - y.sqrt(), 1.0 + y.sqrt());
                let b = am + (ap - am) * 0.5 * (1.0 - t.cos());
                let v = (b * b - am * am) * (ap * ap - b * b);
                let d = if v > 0.0 && b > 0.0 { v.sqrt() / (PI * y * b) } else { 0.0 };
                d * (ap - am) * 0.5 * t.sin()
            },
            0.0,
            PI,
            40_000,
        );
        assert!((mass - 1.0).abs() < 1e-7, "y={y}: mass {mass}");
    }
}

fn psi_lr_oracle(rho: f64, nu: f64, mu: f64) -> f64 {
    let y = (nu - rho * nu) / (1.0 - rho * nu);
    let k = 1.0 - (1.0 - 2.0 / PI) * mu;
    let outer = 1.0 - rho * nu;
    let f = |t: f64| rho * nu + outer * (rho * (1.0 + k * t * t) + (1.0 - rho) * mp_oracle(y, t));
    grid_min(f, 3.0, 300).1
}

#[test]
fn psi_lr1_matches_dense_grid() {
    let got = psi_lr1(0.2, 1.0).unwrap().value;
    let oracle = psi_lr_oracle(0.2, 1.0, 0.0);
    assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
    assert_eq!(residual_aspect(0.2, 1.0), 1.0);
}

#[test]
fn psi_lr_matches_dense_grid() {
    for (rho, nu, mu) in [(0.1, 1.0, 1.0), (0.3, 0.5, 0.6), (0.05, 0.8, 0.9)] {
        let got = psi_lr(rho, nu, mu).unwrap().value;
        let oracle = psi_lr_oracle(rho, nu, mu);
        assert!((got - oracle).abs() < 1e-6, "({rho},{nu},{mu}): {got} vs {oracle}");
    }
}

#[test]
fn ratio_limits_at_vanishing_u() {
    // Small-u limits of the ratios; u = 1e-6 is far enough into the limit.
    let u = 1e-6;
    let rsp1 = psi(u, 1.0).unwrap().value / psi1(u).unwrap().value;
    let rsp6 = psi(u, 0.6).unwrap().value / psi1(u).unwrap().value;
    let rlr1 = psi_lr(u, 1.0, 1.0).unwrap().value / psi_lr1(u, 1.0).unwrap().value;
    let rlr6 = psi_lr(u, 1.0, 0.6).unwrap().value / psi_lr1(u, 1.0).unwrap().value;
    for (got, want) in [(rsp1, 0.678), (rsp6, 0.808), (rlr1, 0.758), (rlr6, 0.856)] {
        assert!((got - want).abs() < 2e-3, "{got} vs {want}");
    }
}
