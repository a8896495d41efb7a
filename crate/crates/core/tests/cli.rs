use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nubound"))
        .args(args)
        .output()
        .expect("spawn nubound")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nubound-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn help_exits_zero() {
    let out = bin(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("stein-check"));
}

#[test]
fn stein_check_default_grid() {
    let out = bin(&["stein-check"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z,x,f,f_prime,ode_residual,lemma_flags"));
    assert_eq!(lines.count(), 49 * 481);
}

#[test]
fn usage_errors_exit_one() {
    let out = bin(&["stein-check", "--z-count", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("count"));

    assert_eq!(bin(&["chaos-compare", "--frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["chaos-compare", "--format", "xml"]).status.code(), Some(1));
    assert_eq!(bin(&[]).status.code(), Some(1));

    let cfg = scratch("bad.json");
    fs::write(&cfg, r#"{"samples": 10, "z_count": 3}"#).unwrap();
    let out = bin(&["chaos-compare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("z_count"));
}

#[test]
fn io_error_names_path() {
    let out = bin(&["bound-only", "--output", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/out.csv"));
}

#[test]
fn chaos_compare_columns_and_exit() {
    let path = scratch("chaos.csv");
    let out = bin(&[
        "chaos-compare",
        "--samples",
        "200000",
        "--seed",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("z,empirical_cdf,normal_cdf,discrepancy,se,bound,uniform_bound,violated\n"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn violation_exits_two() {
    // a cubic chaos is far from normal; a zero bound must be violated
    let out = bin(&[
        "chaos-compare",
        "--q",
        "3",
        "--alphas",
        "1",
        "--samples",
        "20000",
        "--tail",
        "unit",
        "--discrepancy",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains(",true"));
}

#[test]
fn config_file_and_flag_override() {
    let cfg = scratch("ok.json");
    fs::write(&cfg, r#"{"samples": 5000, "seed": 4, "z-count": 7, "format": "json"}"#).unwrap();
    let a = scratch("a.json");
    let b = scratch("b.json");
    let run = |out: &PathBuf, extra: &[&str]| {
        let mut args = vec![
            "chaos-compare",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        assert_eq!(bin(&args).status.code(), Some(0));
        fs::read_to_string(out).unwrap()
    };
    let doc: serde_json::Value = serde_json::from_str(&run(&a, &[])).unwrap();
    assert_eq!(doc["config"]["seed"], 4);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 7);
    let doc: serde_json::Value = serde_json::from_str(&run(&b, &["--seed", "5"])).unwrap();
    assert_eq!(doc["config"]["seed"], 5);
}
