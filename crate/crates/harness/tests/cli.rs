use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn sattl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sattl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("sattl-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn assert_one_error_line(o: &Output, kind: &str) {
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error kind={kind} msg=\"")), "{err}");
}

#[test]
fn translate_prints_prefix_form() {
    let o = sattl(&["translate", "--formula", "true U + axe"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "U(true, axe)\n");
    let o = sattl(&["translate", "--formula", "- grass U (+ axe | + sword)"]);
    assert_eq!(stdout(&o), "U(!grass, |(axe, sword))\n");
}

#[test]
fn failures_are_single_line_with_nonzero_exit() {
    let o = sattl(&["translate", "--formula", "true U"]);
    assert_eq!(o.status.code(), Some(1));
    assert_one_error_line(&o, "syntax");

    let o = sattl(&["eval", "--maps-per-size", "many"]);
    assert_eq!(o.status.code(), Some(2));
    assert_one_error_line(&o, "usage");

    let o = sattl(&["check-trace", "--formula", "true U + a", "--trace", "/nonexistent/ep.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    assert_one_error_line(&o, "io");
}

#[test]
fn check_trace_reports_restarts() {
    let dir = scratch("check");
    let path = dir.join("ep.jsonl");
    fs::write(&path, "{\"labels\": [[\"grass\"], [], [\"axe\", \"end\"]]}\n{\"labels\": [[], [\"end\"]]}\n").unwrap();
    let o = sattl(&["check-trace", "--formula", "- grass U + axe", "--trace", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["satisfied"], false);
    assert_eq!(lines[0]["report"]["satisfied"], true);
    assert_eq!(lines[0]["report"]["violation_count"], 1);
    assert_eq!(lines[0]["report"]["completion_index"], 2);
    assert_eq!(lines[0]["return"], 1.0 - 1.0 - 0.05);
    assert_eq!(lines[1]["report"]["satisfied"], false);
}

#[test]
fn fuzz_reports_counts_and_exit_status() {
    let o = sattl(&["fuzz", "--suite", "truth-preservation", "--atoms", "2", "--max-len", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("truth-preservation: 1364 traces × "), "{out}");
    assert!(out.trim_end().ends_with("formulas, 0 disagreements"), "{out}");

    let o = sattl(&["fuzz", "--suite", "dp-vs-naive,round-trip", "--cases", "300"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = sattl(&["fuzz", "--suite", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_map_plays_back_to_the_same_episode() {
    let dir = scratch("play");
    let map = dir.join("map.json");
    let o = sattl(&["gen-map", "--size", "6", "--seed", "4", "--out", map.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run = |trace: &PathBuf| {
        let o = sattl(&[
            "play",
            "--map",
            map.to_str().unwrap(),
            "--policy",
            "oracle",
            "--trace",
            trace.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    let (a, b) = (run(&dir.join("a.jsonl")), run(&dir.join("b.jsonl")));
    assert_eq!(a, b);
    assert!(a.lines().last().unwrap().contains("outcome=Satisfied"), "{a}");

    let task = {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&map).unwrap()).unwrap();
        v["task"].as_str().unwrap().to_string()
    };
    let o = sattl(&["check-trace", "--formula", &task, "--trace", dir.join("a.jsonl").to_str().unwrap()]);
    let line: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(line["satisfied"], true);
}

#[test]
fn scripted_play_renders_ascii_and_pixels() {
    let dir = scratch("frames");
    let o = sattl(&["play", "--size", "5", "--seed", "2", "--actions", "up,left,down", "--render", "ascii"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("t=")).count().min(3), out.lines().filter(|l| l.starts_with("t=")).count());
    assert!(out.contains('@'));

    let frames = dir.join("f");
    let o = sattl(&[
        "play", "--mode", "minigrid", "--size", "7", "--actions", "f,tl,f", "--render", "pixels", "--out",
        frames.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let n = fs::read_dir(&frames).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "ppm").count();
    assert!(n >= 2, "{n} frames");

    let o = sattl(&["play", "--size", "5", "--actions", "forward"]);
    assert_one_error_line(&o, "usage");
}

#[test]
fn gen_task_is_seeded() {
    let a = stdout(&sattl(&["gen-task", "--count", "20", "--seed", "3", "--category", "negative-cond"]));
    let b = stdout(&sattl(&["gen-task", "--count", "20", "--seed", "3", "--category", "negative-cond"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 20);
    assert!(a.lines().all(|l| l.starts_with("- ") && l.ends_with("\ttrain")), "{a}");
}

#[test]
fn eval_campaign_is_paired_and_normalized() {
    let dir = scratch("eval");
    let args = |out: &str| {
        vec![
            "eval".to_string(),
            "--sizes".into(),
            "7,14".into(),
            "--maps-per-size".into(),
            "20".into(),
            "--runs".into(),
            "2".into(),
            "--out".into(),
            out.into(),
        ]
    };
    let (d1, d2) = (dir.join("one"), dir.join("two"));
    for d in [&d1, &d2] {
        let a = args(d.to_str().unwrap());
        let o = sattl(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let summary = fs::read_to_string(d1.join("summary.csv")).unwrap();
    assert_eq!(summary, fs::read_to_string(d2.join("summary.csv")).unwrap());
    assert_eq!(fs::read_to_string(d1.join("runs.csv")).unwrap(), fs::read_to_string(d2.join("runs.csv")).unwrap());
    for line in summary.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let normalized: f64 = f[6].parse().unwrap();
        assert!(normalized <= 100.0);
        if f[0] == "oracle" {
            assert_eq!(normalized, 100.0, "{line}");
        }
    }
    assert_eq!(summary.lines().count(), 1 + 2 * 2);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = scratch("config");
    let cfg = dir.join("campaign.cfg");
    fs::write(&cfg, "command=eval\nsizes=7\nmaps_per_size=10\nruns=1\npolicy=random\n").unwrap();
    let o = sattl(&["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("random") && lines[1].contains(" 7 "), "{lines:?}");

    let out = dir.join("out");
    let o = sattl(&["eval", "--config", cfg.to_str().unwrap(), "--sizes", "14", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let saved = fs::read_to_string(out.join("run.cfg")).unwrap();
    assert!(saved.contains("sizes=14\n") && saved.contains("maps-per-size=10\n"), "{saved}");

    // The saved config reproduces the run.
    let again = dir.join("again");
    let o = sattl(&["--config", out.join("run.cfg").to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("runs.csv")).unwrap(), fs::read_to_string(again.join("runs.csv")).unwrap());

    fs::write(&cfg, "command=eval\nsizes\n").unwrap();
    let o = sattl(&["--config", cfg.to_str().unwrap()]);
    assert_one_error_line(&o, "config");
}

#[test]
fn train_writes_checkpoints_that_eval_loads() {
    let dir = scratch("train");
    let o = sattl(&[
        "train", "--category", "reachability", "--objects", "3", "--steps", "2000", "--runs", "2", "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    for k in 0..2 {
        assert!(dir.join(format!("run-{k}/checkpoint.json")).exists());
        let curve = fs::read_to_string(dir.join(format!("run-{k}/curve.csv"))).unwrap();
        assert!(curve.starts_with("step,mean_return,sd"), "{curve}");
    }
    assert!(fs::read_to_string(dir.join("curves.csv")).unwrap().starts_with("step,p25,p50,p75\n"));
    let ckpt = dir.join("run-0/checkpoint.json");
    let o = sattl(&[
        "eval", "--split", "train", "--category", "reachability", "--objects", "3", "--sizes", "5", "--maps-per-size",
        "5", "--runs", "1", "--policy", &format!("random,{}", ckpt.display()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("checkpoint")), "{}", stdout(&o));
}

#[test]
fn control_experiment_orders_oracle_conditions() {
    let o = sattl(&["control-exp", "--maps", "60", "--constraints", "6-10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let vals: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(vals[0] > vals[1] && vals[1] > vals[2], "{vals:?}");
}
