use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fapsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fapsim")).args(args).output().expect("binary runs")
}

fn paper_json() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper.json")
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.json");
    let body = r#"{
        "field": {"width_m": 400.0, "height_m": 400.0, "node_count": 80},
        "attack": {"count": 3, "packets_per_attack": 30, "compromised_nodes": 3, "min_hops_from_bs": 3}
    }"#;
    fs::write(&path, body).unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn compare_writes_the_figure_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("results");
    let cfg = paper_json();
    let out = fapsim(&["compare", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    for name in ["fig6.csv", "fig7.csv", "summary.csv", "run.log"] {
        assert!(out_dir.join(name).is_file(), "{name} missing");
    }
    let fig6 = fs::read_to_string(out_dir.join("fig6.csv")).unwrap();
    assert_eq!(fig6.lines().next(), Some("attack_index,scheme,cumulative_energy_j"));
    assert_eq!(fig6.lines().count(), 1 + 2 * 15);
    let fig7 = fs::read_to_string(out_dir.join("fig7.csv")).unwrap();
    assert_eq!(fig7.lines().next(), Some("node_id,scheme,residual_energy_j"));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "scheme,depleted_count,bs_adjacent_mean_residual_j,improvement_pct");
    assert!(rows[1].starts_with("fap-only,"));
    assert!(rows[2].starts_with("proposed,"));
    let pathsets = fs::read_to_string(out_dir.join("pathsets_proposed.csv")).unwrap();
    assert_eq!(pathsets.lines().next(), Some("event_time,src,path_index,node_sequence"));
    let blacklist = fs::read_to_string(out_dir.join("blacklist_fap-only.csv")).unwrap();
    assert_eq!(blacklist.lines().next(), Some("time_s,flagged_node_id"));
}

#[test]
fn identical_invocations_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for d in &dirs {
        let out = fapsim(&["compare", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--ledger"]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let mut names: Vec<_> = fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        assert_eq!(fs::read(dirs[0].join(&name)).unwrap(), fs::read(dirs[1].join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn seed_override_is_logged() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("o");
    let out = fapsim(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--seed", "42"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let log = fs::read_to_string(out_dir.join("run.log")).unwrap();
    assert!(log.lines().any(|l| l == "seed: 42"), "{log}");
}

#[test]
fn defaults_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("o");
    let out = fapsim(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--scheme", "fap-only"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let log = fs::read_to_string(out_dir.join("run.log")).unwrap();
    for line in ["  detection.threshold = 5", "  routing.max_paths = 5", "  field.radius_m = 80.0", "  seed = 1"] {
        assert!(log.lines().any(|l| l == line), "missing `{line}` in\n{log}");
    }
    // Given fields are not listed as defaults.
    assert!(!log.lines().any(|l| l.starts_with("  attack.count =")));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().starts_with("fap-only,"));
}

#[test]
fn missing_config_fails_with_diagnostic() {
    let out = fapsim(&["compare", "--config", "/definitely/not/here.json", "--out", "/tmp"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/definitely/not/here.json"));
    let out = fapsim(&["run"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--config"));
}

#[test]
fn invalid_config_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    fs::write(&path, r#"{"routing": {"hop_delay_s": -1.0}}"#).unwrap();
    let out = fapsim(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("routing.hop_delay_s"), "{}", stderr(&out));
    fs::write(&path, r#"{"attack": {"packets": 3}}"#).unwrap();
    let out = fapsim(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("`packets`"), "{}", stderr(&out));
}

#[test]
fn unwritable_output_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let out = fapsim(&["run", "--config", cfg.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn dump_rules_exports_sixty_rules() {
    let out = fapsim(&["dump-rules"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rules = v["rules"].as_array().unwrap();
    assert_eq!(rules.len(), 60);
    assert_eq!(rules.iter().filter(|r| r["origin"] == "table").count(), 16);
    assert_eq!(v["variables"].as_array().unwrap().len(), 4);
}

#[test]
fn dump_field_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out = fapsim(&["dump-field", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("field.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("node_id,x,y,role,initial_energy_j"));
    assert_eq!(lines.count(), 81);
    assert!(csv.contains(",base-station,"));
    assert!(csv.contains(",compromised,"));
}
