//! A reduced version of the sparse phase-transition experiment, with a
//! resumable journal and the usual CSV/JSON/SVG outputs.
//!
//! ```text
//! cargo run --release --example sweep -- [out_dir]
//! ```

use std::path::PathBuf;

use pocs::experiments::{sweep, write_outputs, ExperimentConfig, SweepOptions};

fn main() -> pocs::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "pocs-out".into()).into();
    let cfg = ExperimentConfig::from_json(
        r#"{
            "schema": "pocs.sweep/1",
            "name": "example-sweep",
            "problem": { "kind": "sparse", "n": 60 },
            "rows": { "vary": "sparsity", "values": [2, 4, 6] },
            "m": { "auto": { "low": 0.5, "high": 1.5, "points": 9 } },
            "trials": 30,
            "sensing": ["po", "ln"]
        }"#,
    )?;
    std::fs::create_dir_all(&out)?;
    let opts = SweepOptions {
        journal: Some(out.join("example-sweep.journal.jsonl")),
        ..Default::default()
    };
    let result = sweep(&cfg, &opts)?;
    for row in &result.rows {
        let m50 = row.fit.m50().map_or("n/a".into(), |m| format!("{m:.1}"));
        println!(
            "{} s = {:>2}: m50 {m50:>6}, predicted {:.1}",
            row.sensing.as_str(),
            row.order,
            row.theory
        );
    }
    println!("non-converged rate {:.4}", result.non_converged_rate());
    let files = write_outputs(&result, &out)?;
    println!("wrote {}", files.csv.display());
    Ok(())
}
