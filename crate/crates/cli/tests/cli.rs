use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cyclerisk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclerisk"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cyclerisk(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Training rides, models and a short video ride in `dir`.
fn workspace(dir: &Path) {
    ok(dir, &["--seed", "1", "gen-ride", "--out", "train1", "--duration", "400"]);
    ok(dir, &["--seed", "2", "gen-ride", "--out", "train2", "--duration", "400"]);
    ok(
        dir,
        &[
            "--seed", "3", "gen-ride", "--out", "ride", "--schedule", "walk:30,bike:40,motor:30", "--frames", "24",
            "--video-start", "38", "--width", "320", "--height", "240",
        ],
    );
    ok(dir, &["train-behavior", "--ride", "train1", "train2", "--out", "model.brsv"]);
    ok(dir, &["--seed", "4", "gen-scene", "--kind", "risk-set", "--per-level", "30", "--out", "lane.brds"]);
    ok(dir, &["train-risk", "--descriptors", "lane.brds", "--out", "lane.brts"]);
}

#[test]
fn analyze_is_deterministic_across_job_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    workspace(dir);
    ok(dir, &["--jobs", "1", "analyze", "ride", "--model", "model.brsv", "--trainset", "lane.brts", "--out", "a"]);
    ok(dir, &["--jobs", "2", "analyze", "ride", "--model", "model.brsv", "--trainset", "lane.brts", "--out", "b"]);
    for name in ["foe.txt", "descriptors.brds", "risk.ndjson", "windows.csv", "report.geojson"] {
        let a = fs::read(dir.join("a").join(name)).unwrap();
        assert!(!a.is_empty(), "{name} empty");
        assert_eq!(a, fs::read(dir.join("b").join(name)).unwrap(), "{name} differs");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("a/report.geojson")).unwrap()).unwrap();
    assert_eq!(report["type"], "FeatureCollection");
    let foe = fs::read_to_string(dir.join("a/foe.txt")).unwrap();
    assert!(foe.starts_with("frame raw_x raw_y x y iterations active_count\n"));
    assert_eq!(foe.lines().count(), 25);

    let text = ok(dir, &["eval", "risk", "--trainset", "lane.brts", "--test", "lane.brds", "--json", "risk.json"]);
    assert!(text.contains("risk levels"));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("risk.json")).unwrap()).unwrap();
    assert!(v["row_percent"].is_array());

    let text = ok(dir, &["classify-behavior", "train1", "--model", "model.brsv"]);
    assert!(text.starts_with("t_start,t_end,raw,smoothed\n"));
}

#[test]
fn eval_behavior_prints_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(dir, &["--seed", "5", "gen-ride", "--out", "r1", "--duration", "300"]);
    ok(dir, &["--seed", "6", "gen-ride", "--out", "r2", "--duration", "300"]);
    let text = ok(dir, &["eval", "behavior", "--train-ride", "r1", "--test-ride", "r2", "--json", "b.json"]);
    for k in ["linear", "gaussian", "poly2", "poly3"] {
        assert!(text.contains(k), "missing {k} row");
    }
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("b.json")).unwrap()).unwrap();
    assert_eq!(v["loss_grid"].as_array().unwrap().len(), 16);
}

#[test]
fn dry_run_prints_config_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let text = ok(dir, &["--dry-run", "--set", "emd.k=7", "gen-ride", "--out", "x"]);
    assert!(text.contains("k = 7"));
    assert!(!dir.join("x").exists());
    let text = ok(dir, &["--dry-run", "analyze", "missing", "--model", "m", "--trainset", "t", "--delta", "2.5"]);
    assert!(text.contains("delta = 2.5"));
    assert!(text.contains("(missing)"));
}

#[test]
fn config_file_and_canonical_form() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("c.toml"), "seed = 9\n[emd]\nk = 3\n").unwrap();
    let first = ok(dir, &["--config", "c.toml", "--dry-run", "gen-ride", "--out", "x"]);
    let canon: String = first.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    fs::write(dir.join("canon.toml"), &canon).unwrap();
    let second = ok(dir, &["--config", "canon.toml", "--dry-run", "gen-ride", "--out", "x"]);
    assert_eq!(first, second);
    assert!(canon.contains("seed = 9"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // Missing input.
    let out = cyclerisk(dir, &["classify-behavior", "nope.csv", "--model", "nope.brsv"]);
    assert_eq!(out.status.code(), Some(2));
    // Malformed input.
    fs::write(dir.join("bad.brsv"), "BRSV 1.0.0\nnot json\n").unwrap();
    fs::write(dir.join("s.csv"), "t,ax\n0,1\n").unwrap();
    let out = cyclerisk(dir, &["classify-behavior", "s.csv", "--model", "bad.brsv"]);
    assert_eq!(out.status.code(), Some(2));
    // Invalid configuration.
    let out = cyclerisk(dir, &["--set", "foe.huber.delta=-1", "gen-ride", "--out", "x"]);
    assert_eq!(out.status.code(), Some(3));
    let out = cyclerisk(dir, &["--set", "no.such.key=1", "gen-ride", "--out", "x"]);
    assert_eq!(out.status.code(), Some(3));
    // Usage error.
    let out = cyclerisk(dir, &["analyze"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_scene_flow_is_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let args = ["--seed", "11", "gen-scene", "--kind", "flow", "--noise", "1", "--outlier-frac", "0.3", "--foe", "200,150"];
    ok(dir, &[&args[..], &["--out", "a.json"]].concat());
    ok(dir, &[&args[..], &["--out", "b.json"]].concat());
    assert_eq!(fs::read(dir.join("a.json")).unwrap(), fs::read(dir.join("b.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("a.json")).unwrap()).unwrap();
    assert_eq!(v["flows"].as_array().unwrap().len(), 100);
    assert_eq!(v["outlier"].as_array().unwrap().iter().filter(|b| b.as_bool() == Some(true)).count(), 30);
}
