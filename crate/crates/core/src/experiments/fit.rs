//! Logistic fits of success rate against measurement count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;
const MAX_NEWTON: usize = 100;
/// Slopes beyond this (in standardized units) mean the likelihood is still
/// climbing toward a step function.
const SEPARATION_SLOPE: f64 = 50.0;

/// Successes out of trials at one measurement count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binomial {
    pub m: usize,
    pub successes: usize,
    pub trials: usize,
}

/// Outcome of a logistic fit `P(success) = 1 / (1 + exp(−(a + b m)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransitionFit {
    Mle {
        intercept: f64,
        slope: f64,
        /// Covariance of `(intercept, slope)`.
        covariance: [[f64; 2]; 2],
        /// `−intercept / slope`.
        m50: f64,
        /// Wald 95% interval for `m50` (delta method).
        m50_ci: (f64, f64),
        iterations: usize,
    },
    /// The likelihood keeps increasing with the slope (quasi-separation:
    /// pure outcomes on either side of a few mixed points). `m50` is the
    /// limit of `−intercept/slope`; the interval is the bracket below.
    Limit {
        m50: f64,
        lower: Option<usize>,
        upper: Option<usize>,
    },
    /// No finite maximum-likelihood estimate. `lower` is the largest
    /// all-fail `m` and `upper` the smallest all-success `m`, when present.
    BracketOnly {
        lower: Option<usize>,
        upper: Option<usize>,
    },
}

impl TransitionFit {
    pub fn m50(&self) -> Option<f64> {
        match *self {
            TransitionFit::Mle { m50, .. } | TransitionFit::Limit { m50, .. } => Some(m50),
            TransitionFit::BracketOnly { .. } => None,
        }
    }

    /// An interval containing the transition: the Wald interval, or the
    /// bracket (unbounded sides as infinities).
    pub fn interval(&self) -> (f64, f64) {
        match *self {
            TransitionFit::Mle { m50_ci, .. } => m50_ci,
            TransitionFit::Limit { lower, upper, .. } | TransitionFit::BracketOnly { lower, upper } => (
                lower.map_or(f64::NEG_INFINITY, |m| m as f64),
                upper.map_or(f64::INFINITY, |m| m as f64),
            ),
        }
    }
}

fn bracket(points: &[Binomial]) -> TransitionFit {
    TransitionFit::BracketOnly {
        lower: points.iter().filter(|p| p.successes == 0).map(|p| p.m).max(),
        upper: points.iter().filter(|p| p.successes == p.trials).map(|p| p.m).min(),
    }
}

/// True when a step in `m` classifies every trial correctly.
fn separated(points: &[Binomial]) -> bool {
    if points.iter().any(|p| p.successes > 0 && p.successes < p.trials) {
        return false;
    }
    let max_fail = points.iter().filter(|p| p.successes == 0).map(|p| p.m).max();
    let min_ok = points.iter().filter(|p| p.successes == p.trials).map(|p| p.m).min();
    match (max_fail, min_ok) {
        (Some(f), Some(s)) => f < s,
        _ => true,
    }
}

/// The single `m` carrying mixed outcomes, if every smaller `m` is all-fail
/// and every larger `m` all-success. The likelihood then increases without
/// bound as the curve steepens into a step at that `m`.
fn quasi_separated_at(points: &[Binomial]) -> Option<usize> {
    let mut mixed = points.iter().filter(|p| p.successes > 0 && p.successes < p.trials).map(|p| p.m);
    let c = mixed.next()?;
    if mixed.any(|m| m != c) {
        return None;
    }
    let ok = points.iter().all(|p| {
        (p.m < c && p.successes == 0) || (p.m > c && p.successes == p.trials) || p.m == c
    });
    ok.then_some(c)
}

fn log_likelihood(points: &[(f64, f64, f64)], a: f64, b: f64) -> f64 {
    points
        .iter()
        .map(|&(t, k, n)| {
            let eta = a + b * t;
            // log σ(η) = −log(1 + e^{−η}); log(1 − σ(η)) = −log(1 + e^{η}).
            let log_p = -softplus(-eta);
            let log_q = -softplus(eta);
            k * log_p + (n - k) * log_q
        })
        .sum()
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Maximum-likelihood logistic fit by Newton's method with step halving.
/// `m` is standardized internally and the estimates are mapped back.
pub fn logistic_fit(points: &[Binomial]) -> Result<TransitionFit> {
    let points: Vec<Binomial> = points.iter().copied().filter(|p| p.trials > 0).collect();
    if points.is_empty() {
        return Err(Error::invalid("logistic fit needs at least one trial"));
    }
    if let Some(p) = points.iter().find(|p| p.successes > p.trials) {
        return Err(Error::invalid(format!("more successes than trials at m = {}", p.m)));
    }
    if separated(&points) {
        return Ok(bracket(&points));
    }
    if let Some(c) = quasi_separated_at(&points) {
        let TransitionFit::BracketOnly { lower, upper } = bracket(&points) else {
            unreachable!()
        };
        return Ok(TransitionFit::Limit { m50: c as f64, lower, upper });
    }

    let total: f64 = points.iter().map(|p| p.trials as f64).sum();
    let center = points.iter().map(|p| p.m as f64 * p.trials as f64).sum::<f64>() / total;
    let spread = (points
        .iter()
        .map(|p| p.trials as f64 * (p.m as f64 - center).powi(2))
        .sum::<f64>()
        / total)
        .sqrt()
        .max(1e-12);
    let data: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| ((p.m as f64 - center) / spread, p.successes as f64, p.trials as f64))
        .collect();

    let (mut a, mut b) = (0.0, 0.0);
    let mut ll = log_likelihood(&data, a, b);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_NEWTON && b.abs() <= SEPARATION_SLOPE {
        iterations += 1;
        let (mut ga, mut gb) = (0.0, 0.0);
        let (mut i00, mut i01, mut i11) = (0.0, 0.0, 0.0);
        for &(t, k, n) in &data {
            let p = sigmoid(a + b * t);
            let r = k - n * p;
            ga += r;
            gb += r * t;
            let w = n * p * (1.0 - p);
            i00 += w;
            i01 += w * t;
            i11 += w * t * t;
        }
        let det = i00 * i11 - i01 * i01;
        if !(det > 0.0) {
            break;
        }
        let da = (i11 * ga - i01 * gb) / det;
        let db = (i00 * gb - i01 * ga) / det;
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nll = log_likelihood(&data, na, nb);
            if nll >= ll {
                a = na;
                b = nb;
                ll = nll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        // No ascent direction left, or a negligible step: at the optimum.
        if !accepted || step * (da.abs() + db.abs()) < 1e-10 {
            converged = true;
            break;
        }
    }
    if b.abs() > SEPARATION_SLOPE {
        let TransitionFit::BracketOnly { lower, upper } = bracket(&points) else {
            unreachable!()
        };
        return Ok(TransitionFit::Limit {
            m50: center - spread * a / b,
            lower,
            upper,
        });
    }
    if !converged || b == 0.0 {
        return Ok(bracket(&points));
    }

    // Recompute the information at the optimum for the covariance.
    let mut fisher = [[0.0; 2]; 2];
    for &(t, _, n) in &data {
        let p = sigmoid(a + b * t);
        let w = n * p * (1.0 - p);
        fisher[0][0] += w;
        fisher[0][1] += w * t;
        fisher[1][1] += w * t * t;
    }
    let det = fisher[0][0] * fisher[1][1] - fisher[0][1] * fisher[0][1];
    if !(det > 0.0) {
        return Ok(bracket(&points));
    }
    let cov_std = [
        [fisher[1][1] / det, -fisher[0][1] / det],
        [-fisher[0][1] / det, fisher[0][0] / det],
    ];
    // (a, b) in standardized units map to intercept = a − b c/s, slope = b/s.
    let slope = b / spread;
    let intercept = a - b * center / spread;
    let j = [[1.0, -center / spread], [0.0, 1.0 / spread]];
    let mut covariance = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            covariance[r][c] = (0..2)
                .flat_map(|i| (0..2).map(move |k| (i, k)))
                .map(|(i, k)| j[r][i] * cov_std[i][k] * j[c][k])
                .sum();
        }
    }
    let m50 = -intercept / slope;
    // Delta method with gradient (−1/slope, intercept/slope²).
    let g = [-1.0 / slope, intercept / (slope * slope)];
    let var = g[0] * g[0] * covariance[0][0]
        + 2.0 * g[0] * g[1] * covariance[0][1]
        + g[1] * g[1] * covariance[1][1];
    let half = Z95 * var.max(0.0).sqrt();
    Ok(TransitionFit::Mle {
        intercept,
        slope,
        covariance,
        m50,
        m50_ci: (m50 - half, m50 + half),
        iterations,
    })
}

/// Cochran–Armitage statistic for an increasing success rate in `m`.
/// Large positive values indicate an increasing trend; returns 0 when all
/// outcomes agree.
pub fn trend_statistic(points: &[Binomial]) -> f64 {
    let n: f64 = points.iter().map(|p| p.trials as f64).sum();
    let k: f64 = points.iter().map(|p| p.successes as f64).sum();
    if n == 0.0 || k == 0.0 || k == n {
        return 0.0;
    }
    let pbar = k / n;
    let mbar = points.iter().map(|p| p.trials as f64 * p.m as f64).sum::<f64>() / n;
    let num: f64 = points
        .iter()
        .map(|p| (p.m as f64 - mbar) * (p.successes as f64 - p.trials as f64 * pbar))
        .sum();
    let den = pbar
        * (1.0 - pbar)
        * points
            .iter()
            .map(|p| p.trials as f64 * (p.m as f64 - mbar).powi(2))
            .sum::<f64>();
    if den <= 0.0 {
        return 0.0;
    }
    num / den.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(usize, usize, usize)]) -> Vec<Binomial> {
        v.iter()
            .map(|&(m, successes, trials)| Binomial { m, successes, trials })
            .collect()
    }

    #[test]
    fn symmetric_data_centers_at_midpoint() {
        let fit = logistic_fit(&pts(&[(10, 0, 100), (20, 50, 100), (30, 100, 100)])).unwrap();
        assert!(matches!(fit, TransitionFit::Limit { lower: Some(10), upper: Some(30), .. }), "{fit:?}");
        assert!((fit.m50().unwrap() - 20.0).abs() < 1e-9);
        let soft = logistic_fit(&pts(&[(10, 5, 100), (20, 50, 100), (30, 95, 100)])).unwrap();
        assert!(matches!(soft, TransitionFit::Mle { .. }));
        assert!((soft.m50().unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn separation_is_bracket_only() {
        let fit = logistic_fit(&pts(&[(10, 0, 20), (15, 0, 20), (20, 20, 20)])).unwrap();
        assert_eq!(fit, TransitionFit::BracketOnly { lower: Some(15), upper: Some(20) });
        let all = logistic_fit(&pts(&[(10, 5, 5), (20, 5, 5)])).unwrap();
        assert_eq!(all, TransitionFit::BracketOnly { lower: None, upper: Some(10) });
        assert_eq!(all.interval(), (f64::NEG_INFINITY, 10.0));
    }

    #[test]
    fn recovers_generating_parameters() {
        // Expected counts of a logistic curve with m50 = 40, slope 0.3.
        let data: Vec<Binomial> = (20..=60)
            .step_by(4)
            .map(|m| {
                let p = sigmoid(0.3 * (m as f64 - 40.0));
                Binomial { m, successes: (p * 1e6).round() as usize, trials: 1_000_000 }
            })
            .collect();
        match logistic_fit(&data).unwrap() {
            TransitionFit::Mle { m50, slope, m50_ci, .. } => {
                assert!((m50 - 40.0).abs() < 1e-3, "{m50}");
                assert!((slope - 0.3).abs() < 1e-3);
                assert!(m50_ci.0 < m50 && m50 < m50_ci.1 && m50_ci.1 - m50_ci.0 < 0.1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(logistic_fit(&[]).is_err());
        assert!(logistic_fit(&pts(&[(5, 3, 2)])).is_err());
    }

    #[test]
    fn trend_sign() {
        let up = pts(&[(10, 1, 10), (20, 5, 10), (30, 9, 10)]);
        let down = pts(&[(10, 9, 10), (20, 5, 10), (30, 1, 10)]);
        assert!(trend_statistic(&up) > 3.0);
        assert!(trend_statistic(&down) < -3.0);
    }
}
