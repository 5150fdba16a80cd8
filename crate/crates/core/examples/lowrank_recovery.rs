//! Recovers a rank-2 matrix from phases by nuclear-norm basis pursuit.
//!
//! ```text
//! cargo run --release --example lowrank_recovery
//! ```

use pocs::measurement::{phases, sample_phi};
use pocs::rng::{stream, DEFAULT_SEED};
use pocs::signals::{make_lowrank_with_nuclear, NormKind};
use pocs::solvers::{recover_pocs, SolveOptions};
use pocs::thresholds::zeta_hat_po_lowrank;

fn main() -> pocs::Result<()> {
    let (p, q, r) = (12, 12, 2);
    let mut rng = stream(DEFAULT_SEED, &[11]);
    let x = make_lowrank_with_nuclear(p, q, r, 1.3, &mut rng)?;
    let flat = x.to_vec();
    let predicted = zeta_hat_po_lowrank(&x)?.value;
    println!(
        "{p}x{q}, rank {r}, nuclear norm {:.3}: predicted m_PO = {predicted:.1}",
        x.nuclear()
    );
    for factor in [0.6, 1.0, 1.4] {
        let m = (factor * predicted).round() as usize;
        let phi = sample_phi(m, p * q, &mut rng)?;
        let z = phases(&phi, &flat)?;
        match recover_pocs(&phi, (p, q), &z, NormKind::Nuclear, &SolveOptions::default()) {
            Ok(out) => println!(
                "m = {m:>3}: error {:.2e} after {} iterations (converged: {})",
                out.distance_to(&flat),
                out.iterations,
                out.converged
            ),
            Err(e) => println!("m = {m:>3}: {e}"),
        }
    }
    Ok(())
}
