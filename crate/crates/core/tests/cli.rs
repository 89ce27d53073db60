//! The `cv2i` subcommands, driven in-process.

use std::fs::{self, File};
use std::path::Path;

use cv2i::cli::main_with_args;
use cv2i::detector::{CollisionDetector, DetectorParams};
use cv2i::mobility::records::read_csv;
use cv2i::mobility::{generate_arrivals, ArrivalConfig, Scenario, TrajectoryRecord, World};
use cv2i::netmodel::{run_coupled, AlertRecord, LoopOptions};
use cv2i::time::SimTime;

fn cv2i(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("cv2i").chain(args.iter().copied()))
}

fn table<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Vec<T> {
    read_csv(File::open(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn run_writes_logs_that_read_back_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(cv2i(&["run", "--seed", "1,2", "--duration", "30", "--out", o]), 0);
    for seed in [1, 2] {
        let dir = out.join(format!("seed{seed}-metro-hd"));
        for f in ["trajectories.csv", "collisions.csv", "alerts.csv", "summary.json", "fp_cdf.csv"] {
            assert!(dir.join(f).is_file(), "{f}");
        }
    }
    assert!(out.join("summary.json").is_file());

    let world = World::new(Scenario::default(), generate_arrivals(&ArrivalConfig { seed: 2, ..ArrivalConfig::default() }, 30.0))
        .unwrap();
    let det = CollisionDetector::new(DetectorParams::default()).unwrap();
    let logs = run_coupled(world, det, &LoopOptions::default(), SimTime::from_secs(30.0)).unwrap();
    let dir = out.join("seed2-metro-hd");
    assert_eq!(table::<TrajectoryRecord>(&dir.join("trajectories.csv")), logs.trajectories);
    assert_eq!(table::<AlertRecord>(&dir.join("alerts.csv")), logs.alerts);

    // Re-analysis of the written logs reproduces the run's totals.
    let again = tmp.path().join("again");
    assert_eq!(cv2i(&["analyze", "--from", o, "--out", again.to_str().unwrap()]), 0);
    let totals = |p: &Path| {
        let v: serde_json::Value = serde_json::from_reader(File::open(p).unwrap()).unwrap();
        (v["total_alerts"].clone(), v["kinds"].as_array().unwrap().iter().map(|k| k["collisions"].clone()).collect::<Vec<_>>())
    };
    assert_eq!(totals(&out.join("summary.json")), totals(&again.join("summary.json")));
}

#[test]
fn no_alerts_leaves_alert_log_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("quiet");
    assert_eq!(cv2i(&["run", "--seed", "0", "--duration", "20", "--no-alerts", "--out", out.to_str().unwrap()]), 0);
    let dir = out.join("seed0-metro-hd");
    assert!(rows(&dir.join("alerts.csv")).is_empty());
    assert!(!rows(&dir.join("trajectories.csv")).is_empty());
}

#[test]
fn config_errors_exit_1_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "duration = 10.0\nlatencyy = \"metro\"\n").unwrap();
    let out = tmp.path().join("never");
    let o = out.to_str().unwrap();
    assert_eq!(cv2i(&["run", "--config", cfg.to_str().unwrap(), "--out", o]), 1);
    assert_eq!(cv2i(&["run", "--profile", "edge", "--out", o]), 1);
    assert_eq!(cv2i(&["run", "--duration=-5", "--out", o]), 1);
    assert_eq!(cv2i(&["frobnicate"]), 1);
    assert!(!out.exists());
}

#[test]
fn runtime_failure_exits_2_and_cleans_up() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("partial");
    let missing = tmp.path().join("no-such-run");
    let code = cv2i(&["analyze", "--from", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!out.exists());
}

#[test]
fn config_file_drives_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("scenario.toml"), "p_violate = 0.0\n").unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "scenario = \"scenario.toml\"\nduration = 15.0\nseeds = [4]\nlatency = \"cloud\"\nreaction = \"av\"\nout = \"ignored\"\n",
    )
    .unwrap();
    let out = tmp.path().join("cfg-out");
    assert_eq!(cv2i(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
    let dir = out.join("seed4-cloud-av");
    assert!(table::<cv2i::mobility::CollisionRecord>(&dir.join("collisions.csv")).is_empty());
    let last = table::<TrajectoryRecord>(&dir.join("trajectories.csv")).iter().map(|r| r.time).max().unwrap();
    assert!(last <= SimTime::from_secs(15.0));
}

#[test]
fn compare_placement_reports_four_profiles() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("placement");
    assert_eq!(cv2i(&["compare-placement", "--seed", "0,1", "--duration", "60", "--out", out.to_str().unwrap()]), 0);
    let mut r = csv::Reader::from_path(out.join("placement.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["metric", "Metro-HD", "Metro-AV", "Cloud-HD", "Cloud-AV"]);
    let td = r.records().map(Result::unwrap).find(|row| &row[0] == "mean_t_d_s").unwrap();
    let v: Vec<f64> = (1..5).map(|i| td[i].parse().unwrap()).collect();
    // Cloud adds 15 ms of backhaul on the alert leg.
    assert!((v[2] - v[0] - 0.015).abs() < 1e-3, "{v:?}");
    assert!((v[3] - v[1] - 0.015).abs() < 1e-3, "{v:?}");
    for label in ["Metro-HD", "Metro-AV", "Cloud-HD", "Cloud-AV"] {
        assert!(out.join(label).join("summary.json").is_file());
    }
}

#[test]
fn sweep_arrivals_covers_default_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("arrivals");
    assert_eq!(cv2i(&["sweep-arrivals", "--seed", "0", "--duration", "10", "--out", out.to_str().unwrap()]), 0);
    assert_eq!(rows(&out.join("stability.csv")).len(), 16 * 5);
    assert_eq!(rows(&out.join("knees.csv")).len(), 5);
}

#[test]
fn sweep_thresholds_from_recorded_run() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    assert_eq!(cv2i(&["run", "--seed", "3", "--duration", "40", "--out", run.to_str().unwrap()]), 0);
    let out = tmp.path().join("sweep");
    let code = cv2i(&[
        "sweep-thresholds", "--from", run.to_str().unwrap(), "--t2c", "2,10", "--s2c", "1,5", "--duration", "40", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let cells = rows(&out.join("threshold_cells.csv"));
    assert_eq!(cells.len(), 2 * 2 * 2);
    let matrix = rows(&out.join("threshold_vehveh_fp_pct.csv"));
    assert_eq!(matrix.len(), 2);
}
