use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lnt(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lnt"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_dirs(out: &Path) -> Vec<PathBuf> {
    match std::fs::read_dir(out) {
        Ok(entries) => {
            let mut v: Vec<PathBuf> = entries.map(|e| e.unwrap().path()).collect();
            v.sort();
            v
        }
        Err(_) => Vec::new(),
    }
}

fn only_run_dir(out: &Path) -> PathBuf {
    let dirs = run_dirs(out);
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs[0].clone()
}

fn bundle(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("bundle.json")).unwrap()).unwrap()
}

fn check<'a>(bundle: &'a Value, name: &str) -> &'a Value {
    let matches: Vec<&Value> = bundle["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"] == name)
        .collect();
    assert_eq!(matches.len(), 1, "{name} in {bundle:#}");
    matches[0]
}

#[test]
fn verify_all_reports_bounds_energy_and_derivative() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lnt(
        tmp.path(),
        &["verify-all", "--N", "5", "--p", "20", "--R", "1"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let dir = only_run_dir(tmp.path());
    let b = bundle(&dir);
    for name in ["origin_sandwich", "energy_monotonicity", "derivative_bound"] {
        let c = check(&b, name);
        assert_eq!(c["status"], "PASS", "{c:#}");
        assert!(!c["anchor"].as_str().unwrap().is_empty());
    }
    let hash = b["metadata"]["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(dir
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .starts_with("verify-all-"));
    assert_eq!(b["metadata"]["tol_abs"], 1e-10);
    for a in b["artifacts"].as_array().unwrap() {
        assert!(dir.join(a.as_str().unwrap()).exists(), "{a}");
    }
    let names: Vec<&str> = b["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    let mut unique = names.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), names.len());
}

#[test]
fn identical_configs_write_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "shoot", "--gamma", "3", "--N", "5", "--p", "20", "--jobs", "1",
    ];
    assert_eq!(lnt(a.path(), &args).status.code(), Some(0));
    let args2 = [
        "shoot", "--gamma", "3", "--N", "5", "--p", "20", "--jobs", "3",
    ];
    assert_eq!(lnt(b.path(), &args2).status.code(), Some(0));
    let (da, db) = (only_run_dir(a.path()), only_run_dir(b.path()));
    assert_eq!(da.file_name(), db.file_name());
    let ta = std::fs::read(da.join("trajectory.csv")).unwrap();
    let tb = std::fs::read(db.join("trajectory.csv")).unwrap();
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
    assert!(String::from_utf8_lossy(&ta).starts_with("r,u,du,E\n"));
}

#[test]
fn unknown_command_is_a_usage_error_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    let o = lnt(&out, &["frobnicate", "--N", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert!(!out.exists());
}

#[test]
fn invalid_configs_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("runs");
    // p at the Sobolev exponent is not supercritical
    assert_eq!(
        lnt(&out, &["singular", "--N", "5", "--p", "2.3333333333333335"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lnt(
            &out,
            &["singular", "--N", "5", "--p", "20", "--tol-abs", "-1"]
        )
        .status
        .code(),
        Some(2)
    );
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[singular]\nN = 5\np = 20\nbogus = true\n").unwrap();
    let o = lnt(&out, &["singular", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn config_file_supplies_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        "format = \"json\"\n[shoot]\ngamma = 3.0\nN = 5\np = 20.0\n",
    )
    .unwrap();
    let o = lnt(
        tmp.path().join("runs").as_path(),
        &["shoot", "--p", "10", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let dir = only_run_dir(&tmp.path().join("runs"));
    let traj: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("trajectory.json")).unwrap())
            .unwrap();
    assert_eq!(traj["p"], 10.0);
    assert_eq!(traj["N"], 5);
}

#[test]
fn help_exits_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lnt(tmp.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify-all"));
}

#[test]
fn sweep_resumes_from_completed_points() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["sweep", "--N", "5", "--p", "10,20"];
    assert_eq!(lnt(tmp.path(), &args).status.code(), Some(0));
    let dir = only_run_dir(tmp.path());
    let first = bundle(&dir);
    assert_eq!(
        check(&first, "points_completed")["margins"]["computed_this_run"],
        2
    );
    let points = std::fs::read(dir.join("points.json")).unwrap();

    assert_eq!(lnt(tmp.path(), &args).status.code(), Some(0));
    assert_eq!(only_run_dir(tmp.path()), dir);
    let second = bundle(&dir);
    let c = check(&second, "points_completed");
    assert_eq!(c["margins"]["computed_this_run"], 0);
    assert_eq!(c["margins"]["resumed"], 2);
    assert_eq!(std::fs::read(dir.join("points.json")).unwrap(), points);

    let fresh = ["sweep", "--N", "5", "--p", "10,20", "--fresh"];
    assert_eq!(lnt(tmp.path(), &fresh).status.code(), Some(0));
    assert_eq!(
        check(&bundle(&dir), "points_completed")["margins"]["computed_this_run"],
        2
    );
}

#[test]
fn p_sweep_finds_decreasing_critical_radius() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lnt(
        tmp.path(),
        &["sweep", "--N", "5", "--p", "10,20,40,80", "--i", "1"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let dir = only_run_dir(tmp.path());
    let b = bundle(&dir);
    let trend = check(&b, "radius_decreasing_in_p[N=5,i=1]");
    assert_eq!(trend["status"], "PASS");
    assert!(!trend["anchor"].as_str().unwrap().is_empty());
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("N,p,i,gamma,R,status,message\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn failing_point_demotes_trend_and_fails_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    // gamma^p overflows at p = 20
    let o = lnt(
        tmp.path(),
        &["sweep", "--N", "5", "--p", "10,20", "--gamma", "2,1e20"],
    );
    assert_eq!(o.status.code(), Some(1));
    let b = bundle(&only_run_dir(tmp.path()));
    assert_eq!(check(&b, "points_completed")["status"], "FAIL");
    for name in [
        "radius_decreasing_in_p[N=5,i=1,gamma=2]",
        "radius_decreasing_in_p[N=5,i=1,gamma=100000000000000000000]",
    ] {
        assert_eq!(check(&b, name)["status"], "INFO");
    }
}

#[test]
fn module_errors_become_failed_checks() {
    let tmp = tempfile::tempdir().unwrap();
    // the exponent bracket cannot be found below this cap
    let o = lnt(
        tmp.path(),
        &[
            "find-exponent",
            "--i",
            "1",
            "--R",
            "1",
            "--N",
            "5",
            "--p-lo",
            "6",
            "--p-cap",
            "6.5",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    let b = bundle(&only_run_dir(tmp.path()));
    for name in ["exponent_residual", "crossing_count"] {
        let c = check(&b, name);
        assert_eq!(c["status"], "FAIL");
        assert!(c["message"].as_str().is_some());
    }
}
