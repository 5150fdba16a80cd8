//! Recovers one sparse vector from phases only, and the same vector from
//! linear Gaussian measurements, above and below the predicted transition.
//!
//! ```text
//! cargo run --release --example sparse_recovery
//! ```

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use pocs::measurement::{phases, sample_phi};
use pocs::rng::{stream, DEFAULT_SEED};
use pocs::signals::{make_equal_amplitude_sparse, NormKind};
use pocs::solvers::{recover_linear_cs, recover_pocs, SolveOptions};
use pocs::thresholds::{zeta_hat_po_sparse, zeta_ln_sparse};

fn main() -> pocs::Result<()> {
    let (n, s) = (100, 5);
    let mut rng = stream(DEFAULT_SEED, &[7]);
    let x = make_equal_amplitude_sparse(n, s, None, &mut rng)?;
    let dense = x.to_dense();
    let po = zeta_hat_po_sparse(&x)?.value;
    let ln = zeta_ln_sparse(n, s)?.value;
    println!("n = {n}, s = {s}: predicted m_PO = {po:.1}, m_LN = {ln:.1}");

    let opts = SolveOptions::default();
    for m in [10, 15, 20, 25, 30] {
        let phi = sample_phi(m, n, &mut rng)?;
        let z = phases(&phi, &dense)?;
        let d_po = recover_pocs(&phi, (n, 1), &z, NormKind::L1, &opts).map(|o| o.distance_to(&dense));

        let a = DMatrix::from_fn(m, n, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        let y = &a * DVector::from_column_slice(&dense);
        let d_ln = recover_linear_cs(&a, &y, (n, 1), NormKind::L1, &opts).map(|o| o.distance_to(&dense));

        let show = |d: pocs::Result<f64>| match d {
            Ok(d) => format!("{d:.2e}"),
            Err(e) => format!("({e})"),
        };
        println!("m = {m:>3}: PO error {:>10}   LN error {:>10}", show(d_po), show(d_ln));
    }
    Ok(())
}
