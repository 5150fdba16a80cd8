//! Ground-truth signal families.
//!
//! Two constructions cover all experiments: equal-amplitude sparse vectors,
//! and "all entries equal except one" sparse vectors whose ℓ1 norm is
//! prescribed. The same two-level construction applied to a spectrum gives
//! low-rank matrices with a prescribed nuclear norm. Every signal has unit
//! ℓ2 (Frobenius) norm.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNIT_NORM_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-10;

/// Which structure-promoting norm a signal (and its recovery) uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    Nuclear,
}

/// Unit-norm `s`-sparse vector in `R^n`, stored by support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SparseRepr", into = "SparseRepr")]
pub struct SparseSignal {
    n: usize,
    support: Vec<usize>,
    values: Vec<f64>,
    l1: f64,
}

#[derive(Serialize, Deserialize)]
struct SparseRepr {
    n: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl From<SparseSignal> for SparseRepr {
    fn from(s: SparseSignal) -> Self {
        SparseRepr {
            n: s.n,
            support: s.support,
            values: s.values,
        }
    }
}

impl TryFrom<SparseRepr> for SparseSignal {
    type Error = Error;

    fn try_from(r: SparseRepr) -> Result<Self> {
        SparseSignal::new(r.n, r.support, r.values)
    }
}

impl SparseSignal {
    /// Builds a signal from an explicit support and values. The support is
    /// sorted together with the values; the result is validated.
    pub fn new(n: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension n must be positive"));
        }
        if support.len() != values.len() {
            return Err(Error::invalid("support and values differ in length"));
        }
        if support.is_empty() {
            return Err(Error::invalid("support must be nonempty"));
        }
        let mut pairs: Vec<(usize, f64)> = support.into_iter().zip(values).collect();
        pairs.sort_by_key(|&(i, _)| i);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("support indices must be distinct"));
        }
        if pairs.last().is_some_and(|&(i, _)| i >= n) {
            return Err(Error::invalid("support index out of range"));
        }
        if pairs.iter().any(|&(_, v)| v == 0.0 || !v.is_finite()) {
            return Err(Error::invalid("stored values must be finite and nonzero"));
        }
        let (support, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let sq: f64 = values.iter().map(|v| v * v).sum();
        if (sq - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::invalid(format!(
                "sparse signal must have unit l2 norm (sum of squares {sq})"
            )));
        }
        let l1 = l1_norm(&values);
        Ok(SparseSignal {
            n,
            support,
            values,
            l1,
        })
    }

    /// Reads support and values off a dense vector.
    pub fn from_dense(x: &[f64]) -> Result<Self> {
        let (support, values) = x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .unzip();
        Self::new(x.len(), support, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }
}

fn l1_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).sum()
}

/// Unit-Frobenius rank-`r` matrix `U1 diag(σ) V1ᵀ` of shape `p × q`, `p ≤ q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LowRankRepr", into = "LowRankRepr")]
pub struct LowRankSignal {
    p: usize,
    q: usize,
    sigma: Vec<f64>,
    u1: DMatrix<f64>,
    v1: DMatrix<f64>,
    nuclear: f64,
}

#[derive(Serialize, Deserialize)]
struct LowRankRepr {
    p: usize,
    q: usize,
    r: usize,
    sigma: Vec<f64>,
    #[serde(rename = "U1")]
    u1: Vec<Vec<f64>>,
    #[serde(rename = "V1")]
    v1: Vec<Vec<f64>>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], ncols: usize) -> Result<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid("ragged factor matrix"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl From<LowRankSignal> for LowRankRepr {
    fn from(s: LowRankSignal) -> Self {
        LowRankRepr {
            p: s.p,
            q: s.q,
            r: s.sigma.len(),
            u1: rows_of(&s.u1),
            v1: rows_of(&s.v1),
            sigma: s.sigma,
        }
    }
}

impl TryFrom<LowRankRepr> for LowRankSignal {
    type Error = Error;

    fn try_from(r: LowRankRepr) -> Result<Self> {
        if r.sigma.len() != r.r {
            return Err(Error::invalid("sigma length differs from r"));
        }
        let u1 = from_rows(&r.u1, r.r)?;
        let v1 = from_rows(&r.v1, r.r)?;
        LowRankSignal::new(r.p, r.q, r.sigma, u1, v1)
    }
}

impl LowRankSignal {
    pub fn new(
        p: usize,
        q: usize,
        sigma: Vec<f64>,
        u1: DMatrix<f64>,
        v1: DMatrix<f64>,
    ) -> Result<Self> {
        let r = sigma.len();
        if p == 0 || q == 0 || p > q {
            return Err(Error::invalid(format!("need 0 < p <= q, got p={p}, q={q}")));
        }
        if r == 0 || r > p {
            return Err(Error::invalid(format!("rank must be in [1, p], got {r}")));
        }
        if u1.shape() != (p, r) || v1.shape() != (q, r) {
            return Err(Error::invalid("factor shapes do not match (p, q, r)"));
        }
        if sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("singular values must be positive"));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("singular values must be nonincreasing"));
        }
        let sq: f64 = sigma.iter().map(|s| s * s).sum();
        if (sq - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::invalid(format!(
                "low-rank signal must have unit Frobenius norm (sum of squares {sq})"
            )));
        }
        let eye = DMatrix::<f64>::identity(r, r);
        if (u1.transpose() * &u1 - &eye).amax() > ORTHO_TOL
            || (v1.transpose() * &v1 - &eye).amax() > ORTHO_TOL
        {
            return Err(Error::invalid("factors must have orthonormal columns"));
        }
        let nuclear = sigma.iter().sum();
        Ok(LowRankSignal {
            p,
            q,
            sigma,
            u1,
            v1,
            nuclear,
        })
    }

    pub fn rows(&self) -> usize {
        self.p
    }

    pub fn cols(&self) -> usize {
        self.q
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn left(&self) -> &DMatrix<f64> {
        &self.u1
    }

    pub fn right(&self) -> &DMatrix<f64> {
        &self.v1
    }

    pub fn nuclear(&self) -> f64 {
        self.nuclear
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.p, self.rank(), |i, k| self.u1[(i, k)] * self.sigma[k]);
        scaled * self.v1.transpose()
    }

    /// Row-major vectorization, the layout used by every linear map in the crate.
    pub fn to_vec(&self) -> Vec<f64> {
        flatten_row_major(&self.to_matrix())
    }
}

/// Row-major flattening of a matrix (entry `(i, j)` lands at `i * ncols + j`).
pub fn flatten_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Inverse of [`flatten_row_major`].
pub fn unflatten_row_major(v: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, v)
}

/// A ground-truth signal of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Signal {
    Sparse(SparseSignal),
    LowRank(LowRankSignal),
}

impl Signal {
    pub fn norm_kind(&self) -> NormKind {
        match self {
            Signal::Sparse(_) => NormKind::L1,
            Signal::LowRank(_) => NormKind::Nuclear,
        }
    }

    /// Ambient dimension of the flattened signal.
    pub fn dim(&self) -> usize {
        match self {
            Signal::Sparse(s) => s.n(),
            Signal::LowRank(x) => x.rows() * x.cols(),
        }
    }

    /// `(rows, cols)` of the matrix view; `(n, 1)` for vectors.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Signal::Sparse(s) => (s.n(), 1),
            Signal::LowRank(x) => (x.rows(), x.cols()),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        match self {
            Signal::Sparse(s) => s.to_dense(),
            Signal::LowRank(x) => x.to_vec(),
        }
    }
}

fn check_sparse_dims(n: usize, s: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::invalid(format!("need 1 <= s <= n, got s={s}, n={n}")));
    }
    Ok(())
}

fn random_support<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Vec<usize> {
    let mut support = index::sample(rng, n, s).into_vec();
    support.sort_unstable();
    support
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Equal-amplitude `s`-sparse unit vector with entries `±1/√s`.
///
/// `signs`, when given, fixes the sign pattern over the (sorted) support;
/// otherwise signs are drawn uniformly.
pub fn make_equal_amplitude_sparse<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    signs: Option<&[f64]>,
    rng: &mut R,
) -> Result<SparseSignal> {
    check_sparse_dims(n, s)?;
    if let Some(signs) = signs {
        if signs.len() != s || signs.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::invalid("signs must be s entries of +1 or -1"));
        }
    }
    let support = random_support(n, s, rng);
    let amp = 1.0 / (s as f64).sqrt();
    let values = match signs {
        Some(signs) => signs.iter().map(|sg| sg * amp).collect(),
        None => (0..s).map(|_| random_sign(rng) * amp).collect(),
    };
    SparseSignal::new(n, support, values)
}

/// Magnitudes `(a, b)` with `(k-1)·a + b = l1` and `(k-1)·a² + b² = 1`,
/// taking the root with `b ≥ a`.
///
/// `k` is the number of entries; `l1` must lie in `(1, √k]`.
pub fn two_level_magnitudes(k: usize, l1: f64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::invalid("two-level construction needs at least 2 entries"));
    }
    let kf = k as f64;
    if !(l1 > 1.0 && l1 <= kf.sqrt() * (1.0 + 1e-15)) {
        return Err(Error::invalid(format!(
            "target norm {l1} outside the feasible interval (1, {}]",
            kf.sqrt()
        )));
    }
    let rest = kf - 1.0;
    // rest·k·a² − 2·rest·l1·a + (l1² − 1) = 0
    let disc = rest * (kf - l1 * l1);
    if disc < -1e-12 * rest * kf {
        return Err(Error::invalid("quadratic for the entry values has no real root"));
    }
    let root = disc.max(0.0).sqrt();
    let a = (rest * l1 - root) / (rest * kf);
    let b = l1 - rest * a;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::invalid("quadratic for the entry values has no positive root"));
    }
    Ok((a, b))
}

/// `s`-sparse unit vector with ‖x‖₁ = `target_l1`: `s − 1` entries share one
/// magnitude and a single entry takes the other, with random signs.
pub fn make_sparse_with_l1<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    target_l1: f64,
    rng: &mut R,
) -> Result<SparseSignal> {
    check_sparse_dims(n, s)?;
    let (a, b) = two_level_magnitudes(s, target_l1)?;
    let support = random_support(n, s, rng);
    let odd = rng.random_range(0..s);
    let values = (0..s)
        .map(|i| {
            let mag = if i == odd { b } else { a };
            random_sign(rng) * mag
        })
        .collect();
    SparseSignal::new(n, support, values)
}

/// `p × r` matrix with orthonormal columns drawn from the Haar measure:
/// QR of a Gaussian matrix with the diagonal of R made positive.
pub fn haar_frame<R: Rng + ?Sized>(p: usize, r: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, r, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let rdiag = qr.r().diagonal();
    for (j, d) in rdiag.iter().enumerate() {
        if *d < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Rank-`r` unit-Frobenius `p × q` matrix with ‖X‖_nu = `target_nuclear`.
///
/// The spectrum follows the same two-level construction as
/// [`make_sparse_with_l1`]; `target_nuclear = √r` gives an equal spectrum and
/// `r = 1` requires `target_nuclear = 1`.
pub fn make_lowrank_with_nuclear<R: Rng + ?Sized>(
    p: usize,
    q: usize,
    r: usize,
    target_nuclear: f64,
    rng: &mut R,
) -> Result<LowRankSignal> {
    if p == 0 || p > q {
        return Err(Error::invalid(format!("need 0 < p <= q, got p={p}, q={q}")));
    }
    if r == 0 || r > p {
        return Err(Error::invalid(format!("rank must be in [1, p], got {r}")));
    }
    let rf = r as f64;
    let sigma = if r == 1 {
        if (target_nuclear - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("a rank-1 unit matrix has nuclear norm 1"));
        }
        vec![1.0]
    } else if (target_nuclear - rf.sqrt()).abs() <= 1e-12 {
        vec![1.0 / rf.sqrt(); r]
    } else {
        let (a, b) = two_level_magnitudes(r, target_nuclear)?;
        let mut sigma = vec![a; r];
        sigma[0] = b;
        sigma
    };
    let u1 = haar_frame(p, r, rng);
    let v1 = haar_frame(q, r, rng);
    LowRankSignal::new(p, q, sigma, u1, v1)
}
