use std::path::Path;
use std::process::{Command, Output};

fn lwrnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lwrnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = lwrnet(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("acc");
    ok(&["run", "--preset", "accuracy", "--degree", "1", "--cells", "40", "--out", out.to_str().unwrap()]);
    let csv = read(&out.join("1").join("t0.1.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,rho_sampled,cell_avg"));
    assert_eq!(lines.count(), 40 * 4);
    let summary: serde_json::Value = serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    assert_eq!(summary["final_time"], 0.1);
    assert!(summary["mass_audit"]["relative_mismatch"].as_f64().unwrap() < 1e-10);
    let steps = summary["steps"].as_u64().unwrap() as usize;
    assert_eq!(summary["dt_history"].as_array().unwrap().len(), steps);
}

#[test]
fn emitted_preset_reruns_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("two-one.json");
    ok(&["emit-preset", "two-one", "--out", cfg.to_str().unwrap()]);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["run", "--preset", "two-one", "--degree", "2", "--out", a.to_str().unwrap()]);
    ok(&["run", "--config", cfg.to_str().unwrap(), "--degree", "2", "--out", b.to_str().unwrap()]);
    for road in ["1", "2", "3"] {
        for t in ["t0.25.csv", "t0.5.csv", "t1.csv"] {
            assert_eq!(read(&a.join(road).join(t)), read(&b.join(road).join(t)), "road {road} {t}");
        }
    }
    assert_eq!(read(&a.join("summary.json")), read(&b.join("summary.json")));
}

#[test]
fn emit_preset_to_stdout_is_valid_json() {
    let text = ok(&["emit-preset", "traffic-circle"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["roads"].as_array().unwrap().len(), 8);
}

#[test]
fn convergence_table_files() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["convergence", "--degrees", "0,1", "--meshes", "10..40", "--out", dir.path().to_str().unwrap()]);
    assert!(stdout.contains("L1 error"));
    let csv = read(&dir.path().join("errors.csv"));
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert!(dir.path().join("errors.txt").exists());
}

#[test]
fn junction_fuzz_reports_all_kinds() {
    let stdout = ok(&["junction-fuzz", "--trials", "200", "--seed", "3"]);
    for kind in ["1x1", "1x2", "2x1", "2x2"] {
        assert!(stdout.contains(&format!("{kind}: 200 trials, 0 mismatches")), "{stdout}");
    }
}

#[test]
fn bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let text = ok(&["emit-preset", "two-two-step"]).replace("\"beta\": 0.3", "\"beta\": 0.4");
    std::fs::write(&cfg, text).unwrap();
    let out = lwrnet(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("junctions[0]"), "{err}");
}

#[test]
fn unknown_preset_fails() {
    let out = lwrnet(&["run", "--preset", "roundabout"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("roundabout"));
}

#[test]
fn unlimited_step_problem_reports_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    // high order without any limiter overshoots at the junction; the
    // coupling refuses traces outside [0, rho_max]
    let out = lwrnet(&[
        "run", "--preset", "two-two-step", "--degree", "2", "--no-bp", "--no-tvb",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("integrity error on road `3`, cell 0"), "{err}");
}
