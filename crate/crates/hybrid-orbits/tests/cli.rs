use std::path::Path;
use std::process::{Command, Output};

use hybrid_orbits::config::GAIT2;
use hybrid_orbits::trajectory::export_trajectory;
use hybrid_orbits_core::biped::{reference_initial_state, Biped};
use hybrid_orbits_core::dynamics::{Embedded, Underactuated};
use hybrid_orbits_core::integrate::{simulate, TimeGrid};
use hybrid_orbits_core::Vector;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybrid-orbits")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn corrupted_config_exits_2_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let cfg = write_config(dir.path(), &GAIT2.replace("[tolerances]", "[tolerances\n"));
    let out = cli(&["design", "--config", &cfg, "--out", run_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!run_dir.exists());

    let cfg = write_config(dir.path(), &GAIT2.replace("r_diag = [10.0, 10.0]", "r_diag = [10.0]"));
    let out = cli(&["design", "--config", &cfg, "--out", run_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_diag"));
    assert!(!run_dir.exists());

    assert_eq!(code(&cli(&["design"])), 2);
    assert_eq!(code(&cli(&["design", "--config", "/nonexistent.cfg"])), 2);
}

#[test]
fn interrupted_run_keeps_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let out = cli(&["design", "--scenario", "gait2", "--out", run_dir.to_str().unwrap(), "--max-minutes", "1e-6"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 2"));
    for f in ["config.toml", "trace.jsonl", "report.json", "desired.csv"] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "solver-failure");
    assert_eq!(report["error"]["phase"], "embedding");
    let snapshot = std::fs::read_to_string(run_dir.join("config.toml")).unwrap();
    assert!(hybrid_orbits::parse_config(&snapshot, "snapshot").is_ok());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), GAIT2);
    let sys = Biped::default();
    let grid = TimeGrid::new(1.53, 2000).unwrap();
    let x0 = reference_initial_state();

    let passive = simulate(&Underactuated(&sys), &x0, &vec![Vector::zeros(2); grid.nodes()], &grid).unwrap();
    let path = dir.path().join("passive.csv");
    export_trajectory(&passive, &path).unwrap();
    let out = cli(&["verify", "--traj", path.to_str().unwrap(), "--config", &cfg]);
    assert_eq!(code(&out), 4);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("terminal-state") && stdout.contains("FAIL"), "{stdout}");

    let emb = simulate(&Embedded(&sys), &x0, &vec![Vector::zeros(3); grid.nodes()], &grid).unwrap();
    let path = dir.path().join("embedding.csv");
    export_trajectory(&emb, &path).unwrap();
    assert_eq!(code(&cli(&["verify", "--traj", path.to_str().unwrap(), "--config", &cfg])), 2);

    std::fs::write(dir.path().join("junk.csv"), "a,b\n1,2\n").unwrap();
    let junk = dir.path().join("junk.csv");
    assert_eq!(code(&cli(&["verify", "--traj", junk.to_str().unwrap(), "--config", &cfg])), 2);
}

#[test]
fn check_model_passes() {
    let out = cli(&["check-model"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
