//! Evaluates the shipped ratio-curve configs and writes CSV + SVG.
//!
//! ```text
//! cargo run --release --example ratio_curves -- [out_dir]
//! ```

use std::path::PathBuf;

use pocs::cli::write_ratio_curves;
use pocs::curves::CurveConfig;

fn main() -> pocs::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "pocs-out".into()).into();
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["ratio-sparsity", "ratio-sparse", "ratio-lowrank"] {
        let cfg = CurveConfig::from_file(&configs.join(format!("{name}.json")))?;
        let table = cfg.evaluate()?;
        let (u0, first) = &table.rows[0];
        let summary: Vec<String> = table
            .labels
            .iter()
            .zip(first)
            .map(|(l, v)| format!("{l}: {v:.4}"))
            .collect();
        println!("{name} at u = {u0:.4}: {}", summary.join(", "));
        let files = write_ratio_curves(&cfg, &out)?;
        println!("  -> {} , {}", files.csv.display(), files.svg.display());
    }
    Ok(())
}
