//! Minimization of strictly convex objectives over `τ ≥ 0`.
//!
//! Golden-section search brackets the minimizer on `[0, τ_hi]`; the bracket
//! is then tightened by bisection on the analytic derivative, which resolves
//! `τ*` far below the `√ε` floor that function comparisons alone can reach.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Upper end of the initial search interval.
pub const TAU_HI: f64 = 10.0;
/// Bracket width at which golden-section search hands over to bisection.
const GOLDEN_WIDTH: f64 = 1e-6;
/// Final bracket width.
const FINAL_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub tau: f64,
    pub value: f64,
    /// `|f'(τ*)|`, or 0 when the minimum sits on the boundary `τ = 0` with
    /// `f'(0) ≥ 0`.
    pub stationarity: f64,
    pub at_boundary: bool,
}

/// Golden-section search for the minimizer of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `width`. Returns the bracket.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > width {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo, hi)
}

/// Minimizes a strictly convex `f` with derivative `df` over `τ ≥ 0`.
pub fn minimize_convex<F, D>(f: F, df: D) -> Minimum
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let d0 = df(0.0);
    if d0 >= 0.0 {
        return Minimum {
            tau: 0.0,
            value: f(0.0),
            stationarity: 0.0,
            at_boundary: true,
        };
    }
    let mut hi = TAU_HI;
    while df(hi) <= 0.0 {
        hi *= 2.0;
    }
    let (glo, ghi) = golden_section(&f, 0.0, hi, GOLDEN_WIDTH);
    // Widen slightly: the golden bracket is only as good as f-comparisons.
    let pad = 10.0 * GOLDEN_WIDTH;
    let mut lo = (glo - pad).max(0.0);
    let mut hi = (ghi + pad).min(hi);
    if df(lo) > 0.0 {
        lo = 0.0;
    }
    if df(hi) < 0.0 {
        hi = ghi.max(hi) + 1.0;
    }
    while hi - lo > FINAL_WIDTH {
        let mid = 0.5 * (lo + hi);
        if df(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    Minimum {
        tau,
        value: f(tau),
        stationarity: df(tau).abs(),
        at_boundary: false,
    }
}
