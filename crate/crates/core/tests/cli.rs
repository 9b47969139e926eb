use std::path::Path;
use std::process::Command;

use nbap::field::{field_tasks, ingest_field_grid, FieldGrid};
use nbap::scenario::{load_scenario, preset, preset_names, ScenarioSpec, TaskSource};
use nbap::sim::{Purpose, RandomSource};
use nbap::PriorityClass;

fn nbap() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nbap"));
    c.env_remove("NBAP_OUT_DIR");
    c
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn preset_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let st = nbap()
            .args([
                "preset",
                "table1_s1",
                "--seed",
                "7",
                "--trials",
                "3",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(st.success());
    }
    for f in [
        "trials.csv",
        "aggregate.csv",
        "curve_gain.csv",
        "curve_waste.csv",
        "manifest.toml",
    ] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let trials = read(&a.join("trials.csv"));
    let mut lines = trials.lines();
    assert_eq!(
        lines.next(),
        Some("trial,planner,rv,wv,visited,waste,path_length")
    );
    assert_eq!(lines.count(), 6);
    let header = read(&a.join("aggregate.csv"));
    assert!(header.starts_with(
        "planner,trials,rv_mean,rv_std,wv_mean,wv_std,visited_mean,visited_std,waste_mean,waste_std,path_length_mean,path_length_std\n"
    ));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let st = nbap()
        .env("NBAP_OUT_DIR", dir.path())
        .args(["preset", "table1_s2", "--trials", "1", "--planner", "nbap"])
        .status()
        .unwrap();
    assert!(st.success());
    let trials = read(&dir.path().join("trials.csv"));
    assert_eq!(trials.lines().count(), 2);
    assert!(trials.lines().nth(1).unwrap().starts_with("0,nbap,"));
}

#[test]
fn ingest_then_run_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("plot.csv");
    std::fs::write(&grid, "31,28,29\n27,,30\n25,32,29.5\n").unwrap();
    let scenario = dir.path().join("plot.toml");
    let st = nbap()
        .args(["ingest"])
        .arg(&grid)
        .args(["--desired", "30", "--bands", "0", "--out"])
        .arg(&scenario)
        .status()
        .unwrap();
    assert!(st.success());
    let spec = load_scenario(&scenario).unwrap();
    let Some(TaskSource::Explicit { list }) = &spec.tasks else {
        panic!("explicit tasks expected")
    };
    let costs: Vec<f64> = list.iter().map(|t| t.cost).collect();
    assert_eq!(costs, vec![2.0, 1.0, 3.0, 5.0, 0.5]);
    let out = dir.path().join("res");
    let st = nbap()
        .arg("run")
        .arg(&scenario)
        .arg("--traces")
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let trace = out.join("traces").join("trial0_nbap.trace");
    let replay = nbap().arg("replay").arg(&trace).output().unwrap();
    assert!(replay.status.success());
    let text = String::from_utf8(replay.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let trials = read(&out.join("trials.csv"));
    let orig: Vec<&str> = trials.lines().nth(1).unwrap().split(',').collect();
    // rv, wv, visited, waste, path_length agree exactly
    assert_eq!(row[1..6], orig[2..7]);
}

#[test]
fn bad_usage_fails_with_usage_text() {
    let out = nbap().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = nbap()
        .args(["preset", "table1_s1", "--bogus"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = nbap().args(["preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn missing_scenario_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(
        &path,
        "name = \"s\"\n[graph]\nrows = 3\ncols = 3\n[tasks]\nsource = \"random\"\ncount = 2\n",
    )
    .unwrap();
    let out = nbap().arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budgets"));
}

#[test]
fn scenario_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in preset_names() {
        let spec = preset(name).unwrap();
        let path = dir.path().join(format!("{name}.toml"));
        std::fs::write(&path, spec.to_toml()).unwrap();
        assert_eq!(load_scenario(&path).unwrap(), spec);
    }
}

#[test]
fn field_grid_path_is_relative_to_scenario() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("data")).unwrap();
    std::fs::write(dir.path().join("data/g.csv"), "27,27\n27,31\n").unwrap();
    let text = "name = \"f\"\n[budgets]\nresource = 40.0\nenergy = 80.0\n\
                [tasks]\nsource = \"field\"\ngrid = \"data/g.csv\"\ndesired = 30.0\nbands = [0.0]\n";
    std::fs::write(dir.path().join("f.toml"), text).unwrap();
    let spec = load_scenario(&dir.path().join("f.toml")).unwrap();
    let mission = spec.mission(0).unwrap();
    assert_eq!(mission.tasks.len(), 3);
    assert_eq!(
        mission.classes.as_slice(),
        &[PriorityClass::new(1, 1.0, 3.0)]
    );
    assert_eq!(
        ScenarioSpec::from_toml(&spec.to_toml(), None).unwrap(),
        spec
    );
}

#[test]
fn synthetic_field_counts_and_means() {
    let mut rng = RandomSource::new(21).stream(Purpose::Field, 0, 0);
    let grid = FieldGrid::synthetic(275, 214, 30.0, &mut rng).unwrap();
    let mut count = 0;
    let mut sum = 0.0;
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let v = grid.get(r, c).unwrap();
            if v < 30.0 {
                count += 1;
                sum += 30.0 - v;
            }
        }
    }
    let (classes, tasks) = field_tasks(&grid, 30.0, &[0.0], None).unwrap();
    assert_eq!(tasks.len(), count);
    assert!((classes.as_slice()[0].mean_cost - sum / count as f64).abs() < 1e-9);
}

#[test]
fn ingestion_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let mut rng = RandomSource::new(3).stream(Purpose::Field, 0, 0);
    std::fs::write(
        &path,
        FieldGrid::synthetic(40, 30, 30.0, &mut rng)
            .unwrap()
            .to_csv(),
    )
    .unwrap();
    let a = ingest_field_grid(&path, 30.0, &[0.0, 2.0]).unwrap();
    let b = ingest_field_grid(&path, 30.0, &[0.0, 2.0]).unwrap();
    assert_eq!(a.tasks, b.tasks);
    assert_eq!(a.classes, b.classes);
    assert_eq!(a.classes.len(), 2);
}

#[test]
fn violation_exits_nonzero_and_dumps_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    // a task dearer than a full resource budget can never be finished
    let text = "name = \"s\"\nplanners = [\"nlm\"]\n[graph]\nrows = 2\ncols = 2\n\
                [budgets]\nresource = 5.0\nenergy = 50.0\n\
                [tasks]\nsource = \"explicit\"\nlist = [{ row = 1, col = 1, level = 1, cost = 9.0 }]\n";
    std::fs::write(&path, text).unwrap();
    let out = dir.path().join("res");
    let res = nbap()
        .arg("run")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("invariant violation"));
    let dump = out.join("violation_trial0_nlm.trace");
    let trace = nbap::MissionTrace::parse(&read(&dump)).unwrap();
    assert!(!trace.events.is_empty());
}
