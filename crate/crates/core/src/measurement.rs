//! Complex Gaussian sensing, phase extraction and the linearized system.
//!
//! For phases `z = sign(Φx)` the real matrix
//!
//! ```text
//! A_z = [ (1/m)  Re(z* Φ)        ]   ∈ R^{(m+1)×n}
//!       [ (1/√m) Im(diag(z*) Φ)  ]
//! ```
//!
//! satisfies `A_z x = (‖Φx‖₁/m) e1`, so `m x / ‖Φx‖₁` is always feasible for
//! `A_z u = e1`. After rotating by the Householder reflection `P_x` (first row
//! `xᵀ`) the first column of `A_z P_xᵀ` is `L e1` with `L` an average of
//! Rayleigh magnitudes, and the remaining columns behave like `N(0, 1/m)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

/// Dense `m × n` complex matrix with i.i.d. `N(0,1) + i N(0,1)` entries,
/// stored row-major as interleaved `(re, im)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSensingMatrix {
    m: usize,
    n: usize,
    data: Vec<Complex64>,
    seed: Option<u64>,
}

impl ComplexSensingMatrix {
    /// Wraps explicit entries (row-major).
    pub fn from_entries(m: usize, n: usize, data: Vec<Complex64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid("sensing matrix dimensions must be positive"));
        }
        if data.len() != m * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {m}x{n} matrix, got {}",
                m * n,
                data.len()
            )));
        }
        Ok(ComplexSensingMatrix {
            m,
            n,
            data,
            seed: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    /// Seed of the stream the matrix was drawn from, when known.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// `Φx` for a real vector `x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "signal length {} does not match sensing matrix with {} columns",
                x.len(),
                self.n
            )));
        }
        Ok((0..self.m)
            .map(|i| {
                let (mut re, mut im) = (0.0, 0.0);
                for (phi, &xj) in self.row(i).iter().zip(x) {
                    re += phi.re * xj;
                    im += phi.im * xj;
                }
                Complex64::new(re, im)
            })
            .collect())
    }
}

/// Draws `Φ` from `rng`: row by row, real part then imaginary part.
pub fn sample_phi<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<ComplexSensingMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("sensing matrix dimensions must be positive"));
    }
    let data = (0..m * n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    Ok(ComplexSensingMatrix {
        m,
        n,
        data,
        seed: None,
    })
}

/// [`sample_phi`] from a fresh stream seeded with `seed`, which is recorded.
pub fn sample_phi_seeded(m: usize, n: usize, seed: u64) -> Result<ComplexSensingMatrix> {
    let mut rng: SimRng = rand::SeedableRng::seed_from_u64(seed);
    let mut phi = sample_phi(m, n, &mut rng)?;
    phi.seed = Some(seed);
    Ok(phi)
}

/// Unit-modulus phases `z_i = c_i / |c_i|`, with `sign(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(Vec<Complex64>);

impl PhaseVector {
    /// Phases of arbitrary complex values.
    pub fn from_values(values: &[Complex64]) -> Self {
        PhaseVector(values.iter().map(|&c| complex_sign(c)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

/// `c/|c|`, or `1` when `c = 0`.
pub fn complex_sign(c: Complex64) -> Complex64 {
    let r = c.re.hypot(c.im);
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(c.re / r, c.im / r)
    }
}

/// `z = sign(Φx)`.
pub fn phases(phi: &ComplexSensingMatrix, x: &[f64]) -> Result<PhaseVector> {
    Ok(PhaseVector::from_values(&phi.apply(x)?))
}

/// The real system `A_z u = e1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl LinearizedSystem {
    pub fn m(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn n(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Assembles `A_z` from `Φ` and `z`. Complex products are written out in
/// real arithmetic so the result does not depend on a complex backend.
pub fn build_linearized(phi: &ComplexSensingMatrix, z: &PhaseVector) -> Result<LinearizedSystem> {
    let (m, n) = (phi.rows(), phi.cols());
    if z.len() != m {
        return Err(Error::invalid(format!(
            "phase vector has {} entries, sensing matrix has {m} rows",
            z.len()
        )));
    }
    let mf = m as f64;
    let inv_sqrt_m = 1.0 / mf.sqrt();
    let mut a = DMatrix::<f64>::zeros(m + 1, n);
    let mut top = vec![0.0; n];
    for (i, zi) in z.as_slice().iter().enumerate() {
        for (j, p) in phi.row(i).iter().enumerate() {
            // conj(z)·φ = (zr·pr + zi·pi) + i(zr·pi − zi·pr)
            top[j] += zi.re * p.re + zi.im * p.im;
            a[(i + 1, j)] = (zi.re * p.im - zi.im * p.re) * inv_sqrt_m;
        }
    }
    for (j, t) in top.into_iter().enumerate() {
        a[(0, j)] = t / mf;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[0] = 1.0;
    Ok(LinearizedSystem { matrix: a, rhs })
}

/// Householder reflection `P = I − 2vvᵀ/‖v‖²`, `v = x − e1`: symmetric,
/// orthogonal, first row `xᵀ`, and `P x = e1`.
pub fn householder_px(x: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::invalid("empty vector"));
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("householder_px needs a unit vector, got norm {norm}")));
    }
    let mut v = x.to_vec();
    v[0] -= 1.0;
    let vv: f64 = v.iter().map(|t| t * t).sum();
    let mut p = DMatrix::<f64>::identity(n, n);
    if vv.sqrt() < 1e-14 {
        return Ok(p);
    }
    let scale = 2.0 / vv;
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] -= scale * v[i] * v[j];
        }
    }
    Ok(p)
}

/// `A_z P_xᵀ` for the phases of `Φx`.
pub fn rotated_system(phi: &ComplexSensingMatrix, x: &[f64]) -> Result<DMatrix<f64>> {
    let z = phases(phi, x)?;
    let sys = build_linearized(phi, &z)?;
    let p = householder_px(x)?;
    Ok(sys.matrix * p.transpose())
}

/// Entries below the top of column 0 of `A_z P_xᵀ` count as zero up to this.
pub const ZERO_BLOCK_TOL: f64 = 1e-12;

/// Moments and normality checks of `A_z P_xᵀ` over repeated draws.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticReport {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    /// Largest |entry| in rows 1..m of column 0, over all trials.
    pub zero_block_max_abs: f64,
    /// True when every trial's zero block is within [`ZERO_BLOCK_TOL`].
    pub zero_block_ok: bool,
    pub l_mean: f64,
    pub l_var: f64,
    pub l_expected_mean: f64,
    pub l_expected_var: f64,
    /// Three standard errors of the mean of `L` under its expected variance.
    pub l_mean_band: f64,
    /// Pooled sample variance of the entries in columns 1..n.
    pub gaussian_block_var: f64,
    /// Sample variance of the single probe entry over trials.
    pub probe_entry: (usize, usize),
    pub probe_entry_var: f64,
    pub expected_var: f64,
    /// Kolmogorov–Smirnov distance of √m·entries (columns 1..n) to N(0,1).
    pub ks_distance: f64,
    pub ks_samples: usize,
    /// Asymptotic 1% critical value of the KS distance for `ks_samples`.
    pub ks_critical_1pct: f64,
}

impl DiagnosticReport {
    pub fn l_mean_ok(&self) -> bool {
        (self.l_mean - self.l_expected_mean).abs() <= self.l_mean_band
    }

    /// Relative error of the pooled and probe variances against `1/m`.
    pub fn variance_rel_errors(&self) -> (f64, f64) {
        (
            (self.gaussian_block_var / self.expected_var - 1.0).abs(),
            (self.probe_entry_var / self.expected_var - 1.0).abs(),
        )
    }
}

const KS_SAMPLE_CAP: usize = 200_000;

#[derive(Default)]
struct Welford {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        let d = v - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (v - self.mean);
    }

    fn var(&self) -> f64 {
        if self.count > 1.0 {
            self.m2 / (self.count - 1.0)
        } else {
            0.0
        }
    }
}

/// Draws `trials` sensing matrices, takes `x = e1` and summarizes the
/// distribution of `A_z P_xᵀ` (here `P_x = I`).
pub fn near_gaussianity_diagnostics<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    trials: usize,
    rng: &mut R,
) -> Result<DiagnosticReport> {
    if n < 2 || m < 1 {
        return Err(Error::invalid("diagnostics need n >= 2 and m >= 1"));
    }
    if trials < 100 {
        return Err(Error::invalid("diagnostics need at least 100 trials"));
    }
    let mut x = vec![0.0; n];
    x[0] = 1.0;
    let probe = (m.min(5), (n - 1).min(3));
    let mut zero_max = 0.0f64;
    let mut l_stats = Welford::default();
    let mut block = Welford::default();
    let mut probe_stats = Welford::default();
    let mut ks_pool = Vec::new();
    let sqrt_m = (m as f64).sqrt();
    for _ in 0..trials {
        let phi = sample_phi(m, n, rng)?;
        let a = rotated_system(&phi, &x)?;
        for i in 1..=m {
            zero_max = zero_max.max(a[(i, 0)].abs());
        }
        l_stats.push(a[(0, 0)]);
        probe_stats.push(a[probe]);
        for j in 1..n {
            for i in 0..=m {
                let v = a[(i, j)];
                block.push(v);
                if ks_pool.len() < KS_SAMPLE_CAP {
                    ks_pool.push(v * sqrt_m);
                }
            }
        }
    }
    let ks_distance = ks_normal(&mut ks_pool);
    let mf = m as f64;
    let expected_var_l = (2.0 - PI / 2.0) / mf;
    Ok(DiagnosticReport {
        n,
        m,
        trials,
        zero_block_max_abs: zero_max,
        zero_block_ok: zero_max <= ZERO_BLOCK_TOL,
        l_mean: l_stats.mean,
        l_var: l_stats.var(),
        l_expected_mean: (PI / 2.0).sqrt(),
        l_expected_var: expected_var_l,
        l_mean_band: 3.0 * (expected_var_l / trials as f64).sqrt(),
        gaussian_block_var: block.var(),
        probe_entry: probe,
        probe_entry_var: probe_stats.var(),
        expected_var: 1.0 / mf,
        ks_distance,
        ks_samples: ks_pool.len(),
        ks_critical_1pct: 1.6276 / (ks_pool.len() as f64).sqrt(),
    })
}

/// [`near_gaussianity_diagnostics`] on the stream derived from `seed`.
pub fn near_gaussianity_diagnostics_seeded(
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<DiagnosticReport> {
    let mut rng = rng::stream(seed, &[rng::purpose::DIAGNOSTICS]);
    near_gaussianity_diagnostics(n, m, trials, &mut rng)
}

/// Two-sided KS distance of `samples` to the standard normal.
fn ks_normal(samples: &mut [f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let k = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = normal.cdf(v);
            let lo = c - i as f64 / k;
            let hi = (i + 1) as f64 / k - c;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sign_of_three_four() {
        let z = PhaseVector::from_values(&[c(3.0, 4.0)]);
        assert_eq!(z.as_slice()[0], c(0.6, 0.8));
    }

    #[test]
    fn sign_of_zero_is_one() {
        let z = PhaseVector::from_values(&[c(0.0, 0.0)]);
        assert_eq!(z.as_slice()[0], c(1.0, 0.0));
    }

    #[test]
    fn positive_reals_give_unit_phases() {
        let phi = ComplexSensingMatrix::from_entries(3, 1, vec![c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)]).unwrap();
        let z = phases(&phi, &[1.0]).unwrap();
        assert!(z.as_slice().iter().all(|&v| v == c(1.0, 0.0)));
    }

    #[test]
    fn trivial_linearization() {
        let phi = ComplexSensingMatrix::from_entries(1, 2, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let z = phases(&phi, &[1.0, 0.0]).unwrap();
        let sys = build_linearized(&phi, &z).unwrap();
        assert_eq!(sys.matrix, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(sys.rhs.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn single_entry_draw_matches_stream() {
        let mut a = stream(3, &[]);
        let phi = sample_phi(1, 1, &mut a).unwrap();
        let mut b = stream(3, &[]);
        let re: f64 = b.sample(StandardNormal);
        let im: f64 = b.sample(StandardNormal);
        assert_eq!(phi.get(0, 0), c(re, im));
    }

    #[test]
    fn seeded_sampling_records_seed() {
        let phi = sample_phi_seeded(2, 3, 99).unwrap();
        assert_eq!(phi.seed(), Some(99));
        assert_eq!(phi, sample_phi_seeded(2, 3, 99).unwrap());
    }

    #[test]
    fn entry_moments() {
        let mut rng = stream(4, &[]);
        let phi = sample_phi(100, 1000, &mut rng).unwrap();
        let k = phi.entries().len() as f64;
        let mean_sq = phi.entries().iter().map(|z| z.norm_sqr()).sum::<f64>() / k;
        let mean_abs = phi.entries().iter().map(|z| z.norm()).sum::<f64>() / k;
        assert!((mean_sq - 2.0).abs() < 0.02, "{mean_sq}");
        assert!((mean_abs - (PI / 2.0).sqrt()).abs() < 0.01, "{mean_abs}");
    }

    #[test]
    fn householder_identity_and_swap() {
        let p = householder_px(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p, DMatrix::identity(3, 3));
        let p = householder_px(&[0.0, 1.0, 0.0]).unwrap();
        let px = &p * DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert!((px - DVector::from_vec(vec![1.0, 0.0, 0.0])).norm() < 1e-15);
        assert_eq!(p.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn householder_rejects_non_unit() {
        assert!(householder_px(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn dimension_mismatches_are_errors() {
        let phi = sample_phi_seeded(3, 4, 1).unwrap();
        assert!(phases(&phi, &[1.0, 0.0]).is_err());
        let z = PhaseVector::from_values(&[c(1.0, 0.0)]);
        assert!(build_linearized(&phi, &z).is_err());
        assert!(sample_phi_seeded(0, 4, 1).is_err());
    }

    #[test]
    fn diagnostics_need_enough_trials() {
        let mut rng = stream(5, &[]);
        assert!(near_gaussianity_diagnostics(4, 4, 10, &mut rng).is_err());
    }
}
