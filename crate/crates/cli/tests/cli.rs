use std::path::Path;
use std::process::{Command, Output};

fn fpplab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpplab"))
        .current_dir(dir)
        .args(args)
        .env_remove("FPPLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SWEEP: [&str; 11] = [
    "fpp",
    "run",
    "--d",
    "2",
    "--dist",
    "uniform:0,1",
    "--n",
    "8,16",
    "--replicas",
    "30",
    "--seed",
];

#[test]
fn ineq_verify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fpplab(
        dir.path(),
        &["ineq", "verify", "--suite", "all", "--seed", "7", "--out", "suite.json"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("suite.json")).unwrap()).unwrap();
    let checks = json["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 9);
    for c in checks {
        assert!(c.get("min_margin").is_some());
        assert_eq!(c["holds"], true);
    }
}

#[test]
fn reruns_give_identical_records() {
    let dir = tempfile::tempdir().unwrap();
    let mut a: Vec<&str> = SWEEP.to_vec();
    a.extend(["1", "--out", "a", "--threads", "1"]);
    let mut b: Vec<&str> = SWEEP.to_vec();
    b.extend(["1", "--out", "b", "--threads", "3"]);
    for args in [&a, &b] {
        let o = fpplab(dir.path(), args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for n in [8, 16] {
        let name = format!("records/fpp-point_n{n}.csv");
        let x = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        assert_eq!(x, std::fs::read(dir.path().join("b").join(&name)).unwrap());
    }
    // same store again: records are reproduced, not duplicated
    let o = fpplab(dir.path(), &a);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // a different configuration cannot share the store
    let mut c: Vec<&str> = SWEEP.to_vec();
    c.extend(["2", "--out", "a"]);
    assert_eq!(fpplab(dir.path(), &c).status.code(), Some(1));
}

#[test]
fn report_regenerates_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut a: Vec<&str> = SWEEP.to_vec();
    a.extend(["4", "--out", "s"]);
    assert_eq!(fpplab(dir.path(), &a).status.code(), Some(0));
    let summary = dir.path().join("s/summary.json");
    let before = std::fs::read(&summary).unwrap();
    std::fs::remove_file(&summary).unwrap();
    let o = fpplab(dir.path(), &["report", "--store", "s"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&summary).unwrap(), before);
    let plots = std::fs::read_to_string(dir.path().join("s/plots.txt")).unwrap();
    assert!(plots.contains("c*n^(2/3)") && plots.contains("\tc*n\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["counts"]["16"], 30);
}

#[test]
fn fit_chi_on_exact_power_law() {
    let dir = tempfile::tempdir().unwrap();
    let sizes: Vec<serde_json::Value> = [64.0f64, 128.0, 256.0, 512.0]
        .iter()
        .map(|&n| serde_json::json!({"n": n, "t": {"variance": n.powf(2.0 / 3.0)}}))
        .collect();
    std::fs::write(
        dir.path().join("lpp_summary.json"),
        serde_json::json!({ "sizes": sizes }).to_string(),
    )
    .unwrap();
    let o = fpplab(dir.path(), &["fit", "chi", "--input", "lpp_summary.json"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("chi=0.3333"), "{out}");
}

#[test]
fn lpp_and_torus_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = fpplab(
        dir.path(),
        &[
            "lpp",
            "run",
            "--n",
            "8,16,32",
            "--replicas",
            "40",
            "--seed",
            "3",
            "--out",
            "l",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("chi="));
    let o = fpplab(
        dir.path(),
        &[
            "torus",
            "influence",
            "--n",
            "4,6",
            "--replicas",
            "20",
            "--seed",
            "3",
            "--out",
            "t",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("axis 0"));
    assert!(dir.path().join("t/records/fpp-torus_n6.csv").exists());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = fpplab(dir.path(), &["fpp", "run", "--n", "8", "--replcias", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    std::fs::write(
        dir.path().join("bad.cfg"),
        "model = fpp-point\nn = 8\ndist = uniform:0,1\nreplcias = 4\nseed = 1\n",
    )
    .unwrap();
    let o = fpplab(dir.path(), &["fpp", "run", "--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replcias"));
    std::fs::write(
        dir.path().join("lpp.cfg"),
        "model = lpp\nn = 8\ndist = geometric:0.5\nreplicas = 4\nseed = 1\n",
    )
    .unwrap();
    assert_eq!(
        fpplab(dir.path(), &["fpp", "run", "--config", "lpp.cfg"]).status.code(),
        Some(1)
    );
    assert_eq!(
        fpplab(dir.path(), &["ineq", "verify", "--suite", "nope"]).status.code(),
        Some(1)
    );
    // subcritical check on the atom at zero
    let o = fpplab(dir.path(), &["fpp", "run", "--n", "8", "--dist", "bernoulli:0,1,0.3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.cfg"),
        "# small sweep\nmodel = fpp-point\nn = 4, 8, 12\ndist = bernoulli:1,2,0.5\nreplicas = 10\nseed = 9\nefron_stein = true\n",
    )
    .unwrap();
    let o = fpplab(dir.path(), &["fpp", "run", "--config", "sweep.cfg", "--out", "c"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["efron_stein"].as_array().unwrap().len(), 3);
    assert!(summary["fit"]["chi_hat"].is_number());
}
