//! End-to-end runs of the `pocs` binary.

use std::path::Path;
use std::process::{Command, Output};

use pocs::cli::{lowrank_threshold, sparse_threshold};
use pocs::rng::DEFAULT_SEED;
use pocs::thresholds::ratio_sp;

fn pocs(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pocs"))
        .args(args)
        .env("POCS_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn one_sparse_ratio_is_below_three_quarters() {
    let dir = tempfile::tempdir().unwrap();
    let out = pocs(&["threshold", "sparse", "--n", "1000", "--s", "1", "--l1", "1"], dir.path());
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["ratio"].as_f64().unwrap() < 0.75);
    for key in ["zeta_po_hat", "zeta_ln_hat", "tau_star"] {
        assert!(v[key].is_number(), "{key}");
    }
    assert_eq!(v["po"]["method"], "closed_form");
}

#[test]
fn full_support_linear_threshold_is_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = pocs(&["threshold", "sparse", "--n", "4", "--s", "4", "--l1", "2"], dir.path());
    assert!(out.status.success());
    assert!((stdout_json(&out)["zeta_ln_hat"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn threshold_output_is_byte_identical_to_library() {
    let dir = tempfile::tempdir().unwrap();
    let nuc = std::f64::consts::SQRT_2.to_string();
    let out = pocs(
        &["threshold", "lowrank", "--p", "30", "--q", "30", "--r", "2", "--nuc", &nuc, "--seed", "9"],
        dir.path(),
    );
    assert!(out.status.success());
    let lib = lowrank_threshold(30, 30, 2, std::f64::consts::SQRT_2, None, 9).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), serde_json::to_string_pretty(&lib).unwrap() + "\n");

    let out = pocs(
        &["threshold", "sparse", "--n", "60", "--s", "4", "--l1", "1.5", "--mc-samples", "500"],
        dir.path(),
    );
    let lib = sparse_threshold(60, 4, 1.5, Some(500), DEFAULT_SEED).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), serde_json::to_string_pretty(&lib).unwrap() + "\n");
}

#[test]
fn bad_threshold_params_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = pocs(&["threshold", "sparse", "--n", "10", "--s", "3", "--l1", "2.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
    let out = pocs(&["threshold", "lowrank", "--p", "5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

fn read_curve(path: &Path) -> Vec<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn ratio_curve_flags_write_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = pocs(&["ratio-curve", "--family", "sp", "--v", "1", "--name", "sp1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_curve(&dir.path().join("sp1.csv"));
    assert_eq!(rows.len(), 121);
    assert_eq!(rows[0][0], 1e-3);
    assert_eq!(rows[0][1], ratio_sp(1e-3, 1.0).unwrap());
    assert!((rows.last().unwrap()[1] - 1.0).abs() < 1e-6);
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1] - 1e-12), "curve increases in u");
    assert!(dir.path().join("sp1.svg").exists());

    // The small-u limit shows up once the grid reaches far enough down.
    let out = pocs(&["ratio-curve", "--family", "lr", "--u-min", "1e-6", "--name", "lr1"], dir.path());
    assert!(out.status.success());
    let rows = read_curve(&dir.path().join("lr1.csv"));
    assert!((rows[0][1] - 0.758).abs() < 2e-3, "{}", rows[0][1]);
}

#[test]
fn shipped_curve_configs_run() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["ratio-sparsity", "ratio-sparse", "ratio-lowrank"] {
        let cfg = configs().join(format!("{name}.json"));
        let out = pocs(&["ratio-curve", "--config", cfg.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{name}");
        let rows = read_curve(&dir.path().join(format!("{name}.csv")));
        for r in &rows {
            assert!(r[1..].iter().all(|v| *v > 0.0 && *v <= 1.0 + 1e-9), "{name}: {r:?}");
        }
    }
    // n = 1000, one row per sparsity level.
    assert_eq!(read_curve(&dir.path().join("ratio-sparsity.csv")).len(), 1000);
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = pocs(&["ratio-curve", "--out-dir", blocker.join("sub").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn minimal_sweep_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("minimal.json");
    let out = pocs(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("minimal.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema: pocs.sweep-csv/1");
    assert_eq!(lines.len(), 3);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("minimal.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "pocs.sweep-summary/1");
    assert!(dir.path().join("minimal.svg").exists());
}

#[test]
fn schema_violation_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"schema":"pocs.sweep/1","name":"bad","problem":{"kind":"sparse","n":20},
            "rows":{"vary":"sparsity","values":[2]},"m":[12],"trials":0}"#,
    )
    .unwrap();
    let out = pocs(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`trials`"));

    std::fs::write(&cfg, r#"{"schema":"pocs.sweep/9"}"#).unwrap();
    let out = pocs(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn interrupted_sweep_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("two.json");
    std::fs::write(
        &cfg,
        r#"{"schema":"pocs.sweep/1","name":"two","problem":{"kind":"sparse","n":20},
            "rows":{"vary":"sparsity","values":[2]},"m":[8,12,16],"trials":3}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let out = pocs(&["sweep", "--config", c, "--max-cells", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let journal = dir.path().join("two.journal.jsonl");
    assert_eq!(std::fs::read_to_string(&journal).unwrap().lines().count(), 2);
    let out = pocs(&["sweep", "--config", c], dir.path());
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&journal).unwrap().lines().count(), 4);

    // A fresh run from scratch writes the same CSV.
    let other = tempfile::tempdir().unwrap();
    assert!(pocs(&["sweep", "--config", c], other.path()).status.success());
    assert_eq!(
        std::fs::read(dir.path().join("two.csv")).unwrap(),
        std::fs::read(other.path().join("two.csv")).unwrap()
    );
}

#[test]
fn seed_flag_overrides_config_seed() {
    let cfg = configs().join("minimal.json");
    let a = tempfile::tempdir().unwrap();
    assert!(pocs(&["sweep", "--config", cfg.to_str().unwrap(), "--seed", "1"], a.path()).status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("minimal.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 1);
}

#[test]
fn diagnose_reports_exact_zeros_and_moments() {
    let dir = tempfile::tempdir().unwrap();
    let out = pocs(&["diagnose", "--n", "20", "--m", "40", "--trials", "500"], dir.path());
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["zero_block_ok"], true);
    assert_eq!(v["l_mean_ok"], true);
    assert_eq!(v["variance_ok"], true);
    let lib = pocs::cli::diagnose(20, 40, 500, DEFAULT_SEED).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), serde_json::to_string_pretty(&lib).unwrap() + "\n");
}

#[test]
fn version_lists_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = pocs(&["version"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("pocs "));
    assert!(text.contains("pocs.sweep/1") && text.contains("pocs.ratio-curve/1"));
}
