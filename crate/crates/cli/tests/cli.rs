use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use catbc_cli::report::RESULTS_HEADER;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.cfg"))
}

fn catbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catbc")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Exit code plus the parsed JSON error object from stderr.
fn failure(out: &Output) -> (i32, serde_json::Value) {
    assert!(!out.status.success(), "expected failure, stdout: {}", String::from_utf8_lossy(&out.stdout));
    let body: serde_json::Value =
        serde_json::from_slice(&out.stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr)));
    let code = out.status.code().expect("exit code");
    assert_eq!(body["code"], code);
    assert!(body["error"].is_string() && body["message"].is_string());
    (code, body)
}

#[test]
fn failure_paths_have_distinct_codes_and_json() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let standing = config("battery_standing_closed");
    let garbage = dir.join("log.jsonl");
    fs::write(&garbage, "not json\n").unwrap();
    let bad_cfg = dir.join("bad.cfg");
    fs::write(&bad_cfg, "[scenario]\nname = x\nthis line has no equals sign\n").unwrap();
    let bad_results = dir.join("results.csv");
    fs::write(&bad_results, format!("{RESULTS_HEADER}\ns,1,closed,maybe,3,0.1,0.1\n")).unwrap();
    let blocked = dir.join("file");
    fs::write(&blocked, "").unwrap();

    let cases: Vec<(Vec<String>, &str)> = vec![
        (vec!["--config".into(), s(&bad_cfg).into(), "run".into()], "config"),
        (vec!["--config".into(), s(&dir.join("nope.cfg")).into(), "run".into()], "missing_artifact"),
        (vec!["--config".into(), s(&standing).into(), "--out".into(), s(&blocked.join("sub")).into(), "run".into()], "io"),
        (vec!["--out".into(), s(dir).into(), "report".into(), s(&bad_results).into()], "results"),
        (
            vec!["--config".into(), s(&standing).into(), "--out".into(), s(dir).into(), "parse-demo".into(), "--log".into(), s(&garbage).into()],
            "frame_chain",
        ),
        (
            vec![
                "--config".into(),
                s(&config("gear_0p5mm_closed")).into(),
                "--set".into(),
                "receptacle.clearance_mm=10".into(),
                "run".into(),
            ],
            "invalid_geometry",
        ),
    ];
    let mut codes = BTreeSet::new();
    for (args, kind) in &cases {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, body) = failure(&catbc(&argv));
        assert_eq!(body["error"], *kind, "{argv:?}");
        codes.insert(code);
    }
    assert_eq!(codes.len(), cases.len(), "exit codes collide: {codes:?}");
}

#[test]
fn config_errors_point_at_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.cfg");
    fs::write(&bad, "[scenario]\nname = x\n\nthis line has no equals sign\n").unwrap();
    let (code, body) = failure(&catbc(&["--config", s(&bad), "run"]));
    assert_eq!(code, 3);
    assert!(body["message"].as_str().unwrap().contains(":4"), "{body}");

    let (code, body) = failure(&catbc(&["--config", s(&config("gear_0p5mm_closed")), "--set", "tracker.sigma_trans_typo=1", "run"]));
    assert_eq!(code, 3);
    assert!(body["message"].as_str().unwrap().contains("sigma_trans_typo"), "{body}");
}

#[test]
fn report_of_ten_successes_reads_full_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let results = tmp.path().join("results.csv");
    let mut text = format!("{RESULTS_HEADER}\n");
    for seed in 0..10 {
        text.push_str(&format!("demo,{seed},closed,1,40,0.100000,0.100000\n"));
    }
    fs::write(&results, text).unwrap();
    let out = catbc(&["--out", s(tmp.path()), "report", s(&results)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("100.0%"), "{table}");
    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("demo,closed,10,10,"), "{summary}");
}

#[test]
fn pipeline_stages_write_their_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = s(tmp.path());
    let cfg = config("gear_matcher_closed");
    for stage in ["gen-data", "parse-demo", "predict", "reproject", "run"] {
        let o = catbc(&["--config", s(&cfg), "--out", out, "--jobs", "1", stage]);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for f in [
        "dataset/index.csv",
        "demo_log.jsonl",
        "demo_traj.jsonl",
        "prediction.json",
        "observed.ply",
        "target.jsonl",
        "correspondence.csv",
        "keypose.json",
        "results.csv",
    ] {
        assert!(tmp.path().join(f).is_file(), "{f} missing");
    }
    let results = fs::read_to_string(tmp.path().join("results.csv")).unwrap();
    assert_eq!(results.lines().next(), Some(RESULTS_HEADER));
    assert_eq!(results.lines().count(), 1 + 5);
    assert_eq!(fs::read_dir(tmp.path().join("traces")).unwrap().count(), 5);

    // A parsed log can be fed back in.
    let again = tempfile::tempdir().unwrap();
    let log = tmp.path().join("demo_log.jsonl");
    let o = catbc(&["--config", s(&cfg), "--out", s(again.path()), "parse-demo", "--log", s(&log)]);
    assert!(o.status.success());
    assert_eq!(
        fs::read(again.path().join("demo_traj.jsonl")).unwrap(),
        fs::read(tmp.path().join("demo_traj.jsonl")).unwrap()
    );
}

#[test]
fn sweep_names_each_variant() {
    let tmp = tempfile::tempdir().unwrap();
    let o = catbc(&[
        "--config",
        s(&config("battery_standing_closed")),
        "--set",
        "scenario.runs=2",
        "--out",
        s(tmp.path()),
        "sweep",
        "--param",
        "receptacle.clearance_mm=0.5,2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(tmp.path().join("results.csv")).unwrap();
    let names: BTreeSet<&str> = results.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let expected: BTreeSet<&str> =
        ["battery_standing_closed_clearance_mm0p5", "battery_standing_closed_clearance_mm2"].into_iter().collect();
    assert_eq!(names, expected);
}

#[test]
fn seed_flag_changes_runs_and_replays() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let cfg = config("battery_assembly_closed");
    for (dir, seed) in [(&a, "21"), (&b, "21"), (&c, "22")] {
        let o = catbc(&["--config", s(&cfg), "--seed", seed, "--out", s(dir.path()), "run"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("results.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}
