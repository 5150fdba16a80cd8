//! Monte Carlo estimate of `E dist²(g, τ · Q_x⁻¹ ∂f(x))`.
//!
//! * ℓ1: on-support coordinates contribute `(g_i − τ c_i)²` with
//!   `c_i = sign(x_i) − (1 − √(2/π))‖x‖₁ x_i`; off-support coordinates
//!   contribute `shrink(g_i; τ)²`.
//! * nuclear: with `G` rotated into the singular frames of `X` and split into
//!   blocks, `G12` and `G21` contribute their squared norms, `G11`
//!   contributes `‖G11 − τ D‖²_F` with `D = I − (1 − √(2/π))‖X‖_nu Σ_r`, and
//!   `G22` contributes `Σ_j (σ_j(G22) − τ)₊²`.
//!
//! Curves over many `τ` reuse the same draws (common random numbers), so the
//! minimum over a grid is not swamped by sampling noise. Samples are split
//! over a fixed number of shards with their own substreams and merged in
//! shard order, so results do not depend on the thread count.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{Method, ThresholdResult};
use crate::error::{Error, Result};
use crate::rng;
use crate::signals::{haar_frame, LowRankSignal, Signal, SparseSignal};
use crate::solvers::prox::soft_threshold;

/// Mean of a Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Sample count and shard layout of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McPlan {
    pub samples: usize,
    pub shards: usize,
}

impl McPlan {
    pub fn new(samples: usize) -> Self {
        McPlan { samples, shards: 16 }
    }

    fn shard_sizes(&self) -> Vec<usize> {
        let shards = self.shards.max(1).min(self.samples.max(1));
        let base = self.samples / shards;
        let extra = self.samples % shards;
        (0..shards).map(|i| base + usize::from(i < extra)).collect()
    }
}

/// Running mean/variance with exact pooled merging.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        let d = v - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (v - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let total = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count / total;
        self.m2 += other.m2 + d * d * self.count * other.count / total;
        self.count = total;
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.count > 1.0 {
            self.m2 / (self.count - 1.0)
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            stderr: (var / self.count.max(1.0)).sqrt(),
            samples: self.count as usize,
        }
    }
}

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Per-signal data needed to evaluate `dist²` for one Gaussian draw.
enum Sampler {
    Sparse {
        n: usize,
        /// `(index, c_i)` for the support.
        on_support: Vec<(usize, f64)>,
        off_support: Vec<usize>,
    },
    LowRank {
        p: usize,
        q: usize,
        r: usize,
        /// Full orthogonal frames `[U1 U2]`, `[V1 V2]`.
        u: DMatrix<f64>,
        v: DMatrix<f64>,
        d: Vec<f64>,
    },
}

/// Completes an orthonormal `p × r` frame to a `p × p` orthogonal matrix.
fn complete_frame<R: Rng + ?Sized>(frame: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
    let (p, r) = frame.shape();
    if r == p {
        return frame.clone();
    }
    let extra = haar_frame(p, p - r, rng);
    // Project the random block off the frame, then orthonormalize it.
    let resid = &extra - frame * (frame.transpose() * &extra);
    let mut q2 = resid.qr().q();
    // Second pass to clean up rounding.
    q2 = (&q2 - frame * (frame.transpose() * &q2)).qr().q();
    let mut full = DMatrix::zeros(p, p);
    full.columns_mut(0, r).copy_from(frame);
    full.columns_mut(r, p - r).copy_from(&q2);
    full
}

impl Sampler {
    fn new(signal: &Signal) -> Self {
        match signal {
            Signal::Sparse(x) => Self::sparse(x),
            Signal::LowRank(x) => Self::lowrank(x),
        }
    }

    fn sparse(x: &SparseSignal) -> Self {
        let shrink = (1.0 - SQRT_2_OVER_PI) * x.l1();
        let on_support = x
            .support()
            .iter()
            .zip(x.values())
            .map(|(&i, &v)| (i, v.signum() - shrink * v))
            .collect();
        let mut off_support = Vec::with_capacity(x.n() - x.sparsity());
        let mut it = x.support().iter().peekable();
        for i in 0..x.n() {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                off_support.push(i);
            }
        }
        Sampler::Sparse {
            n: x.n(),
            on_support,
            off_support,
        }
    }

    fn lowrank(x: &LowRankSignal) -> Self {
        // The completion of the frames is arbitrary; any fixed choice works.
        let mut frame_rng = rng::stream(0, &[rng::purpose::MONTE_CARLO, u64::MAX]);
        let u = complete_frame(x.left(), &mut frame_rng);
        let v = complete_frame(x.right(), &mut frame_rng);
        let shrink = (1.0 - SQRT_2_OVER_PI) * x.nuclear();
        let d = x.singular_values().iter().map(|s| 1.0 - shrink * s).collect();
        Sampler::LowRank {
            p: x.rows(),
            q: x.cols(),
            r: x.rank(),
            u,
            v,
            d,
        }
    }

    /// Draws one Gaussian sample and adds `dist²` at every τ to `acc`.
    fn sample<R: Rng + ?Sized>(&self, taus: &[f64], rng: &mut R, acc: &mut [Moments], buf: &mut [f64]) {
        match self {
            Sampler::Sparse {
                n,
                on_support,
                off_support,
            } => {
                let g: Vec<f64> = (0..*n).map(|_| rng.sample(StandardNormal)).collect();
                for (out, &tau) in buf.iter_mut().zip(taus) {
                    let on: f64 = on_support
                        .iter()
                        .map(|&(i, c)| {
                            let d = g[i] - tau * c;
                            d * d
                        })
                        .sum();
                    let off: f64 = off_support
                        .iter()
                        .map(|&i| {
                            let s = soft_threshold(g[i], tau);
                            s * s
                        })
                        .sum();
                    *out = on + off;
                }
            }
            Sampler::LowRank { p, q, r, u, v, d } => {
                let g = DMatrix::from_fn(*p, *q, |_, _| rng.sample::<f64, _>(StandardNormal));
                let rot = u.transpose() * g * v;
                let (p, q, r) = (*p, *q, *r);
                let mut fixed = 0.0;
                for i in 0..p {
                    for j in 0..q {
                        if (i < r) != (j < r) {
                            fixed += rot[(i, j)] * rot[(i, j)];
                        }
                    }
                }
                let sv = if p > r {
                    rot.view((r, r), (p - r, q - r)).into_owned().singular_values()
                } else {
                    nalgebra::DVector::zeros(0)
                };
                for (out, &tau) in buf.iter_mut().zip(taus) {
                    let mut g11 = 0.0;
                    for i in 0..r {
                        for j in 0..r {
                            let target = if i == j { tau * d[i] } else { 0.0 };
                            let e = rot[(i, j)] - target;
                            g11 += e * e;
                        }
                    }
                    let g22: f64 = sv.iter().map(|&s| (s - tau).max(0.0).powi(2)).sum();
                    *out = fixed + g11 + g22;
                }
            }
        }
        for (m, &v) in acc.iter_mut().zip(buf.iter()) {
            m.push(v);
        }
    }
}

/// Monte Carlo mean of `dist²(g, τ·Q_x⁻¹∂f(x))` at a single `τ`, drawing
/// from `rng`. The norm is ℓ1 for sparse signals and nuclear for matrices.
pub fn mc_dist2_subdiff<R: Rng + ?Sized>(
    signal: &Signal,
    tau: f64,
    samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be nonnegative, got {tau}")));
    }
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let sampler = Sampler::new(signal);
    let mut acc = [Moments::default()];
    let mut buf = [0.0];
    for _ in 0..samples {
        sampler.sample(&[tau], rng, &mut acc, &mut buf);
    }
    Ok(acc[0].estimate())
}

/// Monte Carlo curve over `taus` on common draws, sharded per `plan` with
/// substreams of `seed`.
pub fn mc_dist2_curve(signal: &Signal, taus: &[f64], plan: McPlan, seed: u64) -> Result<Vec<McEstimate>> {
    if taus.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("tau grid must be nonnegative"));
    }
    if plan.samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let sampler = Sampler::new(signal);
    let sizes = plan.shard_sizes();
    let shards: Vec<Vec<Moments>> = sizes
        .par_iter()
        .enumerate()
        .map(|(k, &count)| {
            let mut rng = rng::stream(seed, &[rng::purpose::MONTE_CARLO, k as u64]);
            let mut acc = vec![Moments::default(); taus.len()];
            let mut buf = vec![0.0; taus.len()];
            for _ in 0..count {
                sampler.sample(taus, &mut rng, &mut acc, &mut buf);
            }
            acc
        })
        .collect();
    let mut total = vec![Moments::default(); taus.len()];
    for shard in &shards {
        for (t, s) in total.iter_mut().zip(shard) {
            t.merge(s);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
}

fn argmin(values: &[McEstimate]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.mean.total_cmp(&b.1.mean))
        .map(|(i, _)| i)
        .expect("nonempty grid")
}

/// Vertex of the parabola through three equally spaced points, clamped to
/// the outer two.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let h = x[1] - x[0];
    let denom = y[0] - 2.0 * y[1] + y[2];
    if denom <= 0.0 {
        return (x[1], y[1]);
    }
    let offset = (0.5 * h * (y[0] - y[2]) / denom).clamp(-h, h);
    let curv = denom / (h * h);
    let slope = (y[2] - y[0]) / (2.0 * h);
    let value = y[1] + slope * offset + 0.5 * curv * offset * offset;
    (x[1] + offset, value)
}

/// Natural scale of `τ` for a signal: 1 for vectors, `√(q − r)` for matrices
/// (the singular values of the orthogonal Gaussian block live there).
fn tau_scale(signal: &Signal) -> f64 {
    match signal {
        Signal::Sparse(_) => 1.0,
        Signal::LowRank(x) => ((x.cols() - x.rank()) as f64).sqrt().max(1.0),
    }
}

/// Monte Carlo surrogate `inf_τ E dist²(g, τ·Q_x⁻¹∂f(x))`: a coarse grid,
/// a fine grid around its minimum, and a local quadratic fit through the
/// fine minimum and its neighbours. `tau_star` is in the units of `g`.
pub fn zeta_hat_po_monte_carlo(signal: &Signal, plan: McPlan, seed: u64) -> Result<ThresholdResult> {
    let scale = tau_scale(signal);
    let coarse = grid(0.0, 4.0 * scale, 80);
    let curve = mc_dist2_curve(signal, &coarse, plan, seed)?;
    let i = argmin(&curve);
    let step = coarse[1] - coarse[0];
    let lo = (coarse[i] - step).max(0.0);
    let fine = grid(lo, coarse[i] + step, 40);
    let fine_curve = mc_dist2_curve(signal, &fine, plan, seed)?;
    let j = argmin(&fine_curve);
    let (tau_star, value) = if j == 0 || j + 1 == fine.len() {
        (fine[j], fine_curve[j].mean)
    } else {
        parabola_vertex(
            [fine[j - 1], fine[j], fine[j + 1]],
            [fine_curve[j - 1].mean, fine_curve[j].mean, fine_curve[j + 1].mean],
        )
    };
    Ok(ThresholdResult {
        value,
        tau_star,
        method: Method::MonteCarlo,
        error_estimate: fine_curve[j].stderr,
        stationarity: 0.0,
    })
}
