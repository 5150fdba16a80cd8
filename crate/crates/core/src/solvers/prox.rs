//! Proximal maps of the two structure-promoting norms.

use nalgebra::{DMatrix, DVector};

use super::polish::certify_l1;

use crate::signals::{flatten_row_major, unflatten_row_major};

/// A norm together with its proximal map.
pub trait NormProx {
    /// `argmin_w t·f(w) + ½‖w − v‖²`, written into `out`.
    fn prox(&self, v: &[f64], t: f64, out: &mut [f64]);

    fn value(&self, x: &[f64]) -> f64;

    /// An exactly optimal point for `min f s.t. M x = b` near `w`, if one can
    /// be certified from the dual estimate `dual`. `thorough` allows a
    /// costlier search.
    fn certify(&self, _m: &DMatrix<f64>, _b: &DVector<f64>, _w: &[f64], _dual: &[f64], _tol: f64, _thorough: bool) -> Option<Vec<f64>> {
        None
    }
}

/// Soft-threshold of a scalar at level `t`.
#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub struct L1;

impl NormProx for L1 {
    fn prox(&self, v: &[f64], t: f64, out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(v) {
            *o = soft_threshold(x, t);
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v.abs()).sum()
    }

    fn certify(&self, m: &DMatrix<f64>, b: &DVector<f64>, w: &[f64], dual: &[f64], tol: f64, thorough: bool) -> Option<Vec<f64>> {
        certify_l1(m, b, w, dual, tol, thorough).map(|c| c.x)
    }
}

/// Nuclear norm of a `rows × cols` matrix stored row-major.
pub struct Nuclear {
    pub rows: usize,
    pub cols: usize,
}

impl Nuclear {
    pub fn new(rows: usize, cols: usize) -> Self {
        Nuclear { rows, cols }
    }

    fn matrix(&self, v: &[f64]) -> DMatrix<f64> {
        unflatten_row_major(v, self.rows, self.cols)
    }
}

/// Singular-value soft-thresholding of `m` at level `t`.
pub fn singular_value_threshold(m: DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let mut svd = m.svd(true, true);
    for s in svd.singular_values.iter_mut() {
        *s = (*s - t).max(0.0);
    }
    svd.recompose().expect("both factors were computed")
}

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().sum()
}

impl NormProx for Nuclear {
    fn prox(&self, v: &[f64], t: f64, out: &mut [f64]) {
        let shrunk = singular_value_threshold(self.matrix(v), t);
        out.copy_from_slice(&flatten_row_major(&shrunk));
    }

    fn value(&self, x: &[f64]) -> f64 {
        nuclear_norm(&self.matrix(x))
    }
}
