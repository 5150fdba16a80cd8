//! Checks that the rotated linearized system `A_z P_xᵀ` has the expected
//! zero block and near-Gaussian entries.
//!
//! ```text
//! cargo run --release --example diagnostics
//! ```

use pocs::cli::diagnose;
use pocs::rng::DEFAULT_SEED;

fn main() -> pocs::Result<()> {
    for (n, m) in [(10, 20), (30, 60), (50, 200)] {
        let d = diagnose(n, m, 1000, DEFAULT_SEED)?;
        let r = &d.report;
        println!("n = {n}, m = {m}");
        println!("  zero block max |entry| {:.2e} (ok: {})", r.zero_block_max_abs, r.zero_block_ok);
        println!(
            "  mean of L {:.4} vs {:.4} +- {:.4} (ok: {})",
            r.l_mean, r.l_expected_mean, r.l_mean_band, d.l_mean_ok
        );
        println!(
            "  pooled / probe variance rel. error {:.3} / {:.3} (ok: {})",
            d.variance_rel_errors.0, d.variance_rel_errors.1, d.variance_ok
        );
        println!(
            "  KS distance {:.4} vs 1% critical {:.4} (ok: {})",
            r.ks_distance, r.ks_critical_1pct, d.ks_ok
        );
    }
    Ok(())
}
