use std::path::Path;
use std::process::{Command, Output};

fn biot(args: &[&str], out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_biot"));
    cmd.args(args).arg("--out").arg(out).env_remove("BIOT_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("run biot")
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[physics]\nalpha = 0.1\n").unwrap();
    let o = biot(&["--config", cfg.to_str().unwrap()], &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha must lie in [phi0, 1]"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_mode_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = biot(&["--mode", "nonsense"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn space_study_table_has_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    std::fs::write(&cfg, "[run]\nmode = space-study\nk = 1\nlevels = 3\nmesh = 1\nslabs = 2\nt_final = 0.2\n").unwrap();
    let out = dir.path().join("out");
    let o = biot(&["--config", cfg.to_str().unwrap()], &out, &[]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("study_space.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    let header: Vec<&str> = lines[0].split(',').collect();
    let eoc_cols: Vec<usize> = (0..header.len()).filter(|&i| header[i].starts_with("eoc_")).collect();
    assert!(!eoc_cols.is_empty());
    for (r, line) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), header.len());
        for &i in &eoc_cols {
            assert_eq!(cells[i].is_empty(), r == 0, "row {r} column {}", header[i]);
        }
    }
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("overall:"));
}

#[test]
fn property_suite_passes_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = biot(&["--mode", "property-suite"], dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("PASS"));
    assert!(!summary.contains("FAIL"));
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = biot(&["--mode", "property-suite"], dir.path(), &[("BIOT_SEED", "42")]);
    assert_eq!(o.status.code(), Some(0));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.lines().any(|l| l.trim() == "seed = 42"), "{summary}");

    let bad = biot(&["--mode", "property-suite"], dir.path(), &[("BIOT_SEED", "minus one")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn single_run_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("r.cfg");
    std::fs::write(&cfg, "[run]\nmode = single-run\nmesh = 2\nslabs = 3\nsnapshots = true\n").unwrap();
    let o = biot(&["--config", cfg.to_str().unwrap()], dir.path(), &[]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("single_run.csv").exists());
    for n in 0..=3 {
        let vtk = std::fs::read_to_string(dir.path().join(format!("snapshots/state_{n:05}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile"));
    }
}
