//! Compares the closed-form and quadrature transitions with direct Monte
//! Carlo estimates of the expected squared distance to the scaled
//! subdifferential.
//!
//! ```text
//! cargo run --release --example monte_carlo
//! ```

use pocs::rng::{stream, DEFAULT_SEED};
use pocs::signals::{make_lowrank_with_nuclear, make_sparse_with_l1, Signal};
use pocs::thresholds::{
    zeta_hat_po_lowrank, zeta_hat_po_monte_carlo, zeta_hat_po_sparse, McPlan,
};

fn main() -> pocs::Result<()> {
    let mut rng = stream(DEFAULT_SEED, &[3]);
    for l1 in [10f64.sqrt(), 2.0] {
        let x = make_sparse_with_l1(200, 10, l1, &mut rng)?;
        let exact = zeta_hat_po_sparse(&x)?;
        let mc = zeta_hat_po_monte_carlo(&Signal::Sparse(x), McPlan::new(10_000), DEFAULT_SEED)?;
        println!(
            "sparse n=200 s=10 l1={l1:.3}: formula {:.3}, Monte Carlo {:.3} +- {:.3}",
            exact.value, mc.value, mc.error_estimate
        );
    }
    let x = make_lowrank_with_nuclear(20, 20, 2, 1.3, &mut rng)?;
    let exact = zeta_hat_po_lowrank(&x)?;
    let mc = zeta_hat_po_monte_carlo(&Signal::LowRank(x), McPlan::new(2_000), DEFAULT_SEED)?;
    println!(
        "low rank 20x20 r=2 nuc=1.3: formula {:.3}, Monte Carlo {:.3} +- {:.3} ({:+.2}%)",
        exact.value,
        mc.value,
        mc.error_estimate,
        100.0 * (mc.value / exact.value - 1.0)
    );
    Ok(())
}
