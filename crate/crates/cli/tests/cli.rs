use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[geometry]
width_mm = 60.0
height_mm = 60.0
target_fraction = 0.3
duct_center_x_mm = 30.0
duct_center_y_mm = 40.0
duct_diameter_mm = 20.0

[solver]
end_time_years = 2.0
time_step_years = 0.1
output_times_years = [1.0, 2.0]
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chloride"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn error_record(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("stderr has an error record");
    serde_json::from_str(line).expect("error record is JSON")
}

fn small_config(dir: &Path, extra: &str) {
    std::fs::write(dir.join("run.toml"), format!("{SMALL}{extra}")).unwrap();
}

#[test]
fn simulate_with_zero_years_dumps_initial_field_only() {
    let dir = tempfile::tempdir().unwrap();
    small_config(dir.path(), "");
    let out = run(dir.path(), &["simulate", "--config", "run.toml", "--years", "0", "--out-dir", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut fields: Vec<String> = std::fs::read_dir(dir.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("field_"))
        .collect();
    fields.sort();
    assert_eq!(fields, vec!["field_t0.00.csv", "field_t0.00.vtk"]);
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    small_config(dir.path(), "");
    for o in ["a", "b"] {
        let out = run(dir.path(), &["simulate", "--config", "run.toml", "--out-dir", o]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let out = run(dir.path(), &["profile", "--config", "run.toml", "--out-dir", o]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let names = [
        "mesostructure.txt",
        "grid.csv",
        "field_t1.00.csv",
        "field_t2.00.csv",
        "field_t2.00.vtk",
        "profile_t2.00.csv",
        "threshold.csv",
    ];
    for name in names {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains("chloride ") && text.contains("config_hash") && text.contains("seed"), "{name} lacks a header");
    }
}

#[test]
fn seed_flag_changes_the_mesostructure() {
    let dir = tempfile::tempdir().unwrap();
    small_config(dir.path(), "");
    assert!(run(dir.path(), &["generate", "--config", "run.toml", "--out-dir", "a"]).status.success());
    assert!(run(dir.path(), &["generate", "--config", "run.toml", "--seed", "7", "--out-dir", "b"]).status.success());
    let a = std::fs::read_to_string(dir.path().join("a/mesostructure.txt")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/mesostructure.txt")).unwrap();
    assert_ne!(a, b);
    assert!(b.contains("# seed 7"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[solver]\ntime_stpe_years = 0.1\n").unwrap();
    let out = run(dir.path(), &["generate", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    assert_eq!(rec["code"], 2);
    assert_eq!(rec["context"], "generate");
    assert!(rec["message"].as_str().unwrap().contains("time_stpe_years"));

    let out = run(dir.path(), &["generate", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn packing_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    small_config(dir.path(), "");
    let text = std::fs::read_to_string(dir.path().join("run.toml"))
        .unwrap()
        .replace("target_fraction = 0.3", "target_fraction = 0.8");
    std::fs::write(dir.path().join("run.toml"), text).unwrap();
    let out = run(dir.path(), &["generate", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["kind"], "packing");
}

#[test]
fn solver_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    small_config(dir.path(), "max_iterations = 1\nlinear_tolerance = 1e-15\n");
    let out = run(dir.path(), &["simulate", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["kind"], "solver");
}

#[test]
fn profile_without_fields_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let out = run(dir.path(), &["profile", "--input", "empty", "--out-dir", "o"]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(error_record(&out)["kind"], "analysis");
}

#[test]
fn profile_compares_measured_data() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("measured.csv"),
        "depth_mm,free_chloride_percent\n2,0.02\n6,0.01\n10,0.004\n",
    )
    .unwrap();
    small_config(
        dir.path(),
        "\n[analysis]\nmeasured_profile = \"measured.csv\"\nmeasured_age_years = 2.0\nprobe_depths_mm = [5.0]\n",
    );
    assert!(run(dir.path(), &["simulate", "--config", "run.toml", "--out-dir", "o"]).status.success());
    let out = run(dir.path(), &["profile", "--config", "run.toml", "--out-dir", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cmp = std::fs::read_to_string(dir.path().join("o/comparison.csv")).unwrap();
    let row = cmp.lines().last().unwrap();
    assert!(row.starts_with("2,free,3,"), "{row}");
}

#[test]
fn predict_reports_yearly_values_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["predict", "--depths", "110", "--out-dir", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("o/prediction.csv")).unwrap();
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows[26].starts_with("27,110,"));
    let verdict = std::fs::read_to_string(dir.path().join("o/prediction_threshold.csv")).unwrap();
    assert!(verdict.lines().last().unwrap().starts_with("110,0.06,"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("depth 110 mm"));
}

#[test]
fn validate_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["validate"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(!stdout.contains("[FAIL]"));
}
