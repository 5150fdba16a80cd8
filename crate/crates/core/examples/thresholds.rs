//! Predicted transitions for a few sparse and low-rank signals.
//!
//! ```text
//! cargo run --release --example thresholds
//! ```

use pocs::thresholds::{
    ratio_lr, ratio_sp, zeta_hat_po_lowrank_params, zeta_hat_po_sparse_params, zeta_ln_lowrank,
    zeta_ln_sparse,
};

fn main() -> pocs::Result<()> {
    println!("sparse, n = 1000");
    println!("{:>4} {:>8} {:>10} {:>10} {:>7}", "s", "l1", "zeta_po", "zeta_ln", "ratio");
    for (s, l1) in [(1, 1.0), (5, 5f64.sqrt()), (5, 1.5), (20, 20f64.sqrt()), (100, 10.0)] {
        let po = zeta_hat_po_sparse_params(1000, s, l1)?;
        let ln = zeta_ln_sparse(1000, s)?;
        println!("{s:>4} {l1:>8.4} {:>10.3} {:>10.3} {:>7.4}", po.value, ln.value, po.value / ln.value);
    }

    println!("\nlow rank, 30 x 30");
    println!("{:>4} {:>8} {:>10} {:>10} {:>7}", "r", "nuc", "zeta_po", "zeta_ln", "ratio");
    for (r, nuc) in [(1, 1.0), (2, 1.05), (2, 2f64.sqrt()), (5, 5f64.sqrt())] {
        let po = zeta_hat_po_lowrank_params(30, 30, r, nuc)?;
        let ln = zeta_ln_lowrank(30, 30, r)?;
        println!("{r:>4} {nuc:>8.4} {:>10.3} {:>10.3} {:>7.4}", po.value, ln.value, po.value / ln.value);
    }

    println!("\nsmall-u limits");
    for u in [1e-3, 1e-6] {
        println!(
            "u = {u:e}: R_sp(u,1) = {:.4}  R_sp(u,0.6) = {:.4}  R_lr(u,1,1) = {:.4}  R_lr(u,1,0.6) = {:.4}",
            ratio_sp(u, 1.0)?,
            ratio_sp(u, 0.6)?,
            ratio_lr(u, 1.0, 1.0)?,
            ratio_lr(u, 1.0, 0.6)?
        );
    }
    Ok(())
}
