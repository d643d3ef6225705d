use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use hrlmi::domain::{read_traces_jsonl, UserProfile};
use hrlmi::harness::{evaluate, EvalReport};
use hrlmi::training::Checkpoint;
use hrlmi::usersim::{replay_total, SimParams};

const TINY: &[&str] = &[
    "--desk-scale",
    "--set",
    "epochs=2",
    "--set",
    "dialogues_master=5",
    "--set",
    "dialogues_sub=5",
    "--set",
    "updates_per_batch=2",
    "--set",
    "batch_size=32",
    "--set",
    "final_eval_per_profile=2",
];

fn hrlmi(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrlmi")).args(args).env("HRLMI_OUT", out).output().unwrap()
}

fn train_tiny(out: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["train"];
    args.extend_from_slice(TINY);
    args.extend_from_slice(extra);
    let o = hrlmi(&args, out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    PathBuf::from(String::from_utf8(o.stdout).unwrap().lines().last().unwrap().trim())
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hrlmi(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(hrlmi(&["eval", "--checkpoint", "x", "--profile", "stoic"], dir.path()).status.code(), Some(1));
    assert_eq!(hrlmi(&["export", "--run-dir", "x", "--figure", "5"], dir.path()).status.code(), Some(1));
    assert_eq!(hrlmi(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = hrlmi(&["train", "--config", missing.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.toml"));
    let o = hrlmi(&["export", "--run-dir", dir.path().to_str().unwrap(), "--figure", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lacks"));
}

#[test]
fn train_is_repeatable_and_stays_in_its_run_directory() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run_a = train_tiny(a.path(), &[]);
    let run_b = train_tiny(b.path(), &[]);
    assert_eq!(run_a.parent().unwrap(), a.path());
    assert_eq!(std::fs::read_dir(a.path()).unwrap().count(), 1);
    for f in ["metrics.jsonl", "epochs.jsonl", "reward_curve.csv", "checkpoint.json", "final_eval.json"] {
        assert_eq!(std::fs::read(run_a.join(f)).unwrap(), std::fs::read(run_b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn eval_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let run = train_tiny(dir.path(), &[]);
    let ck = run.join("checkpoint.json");
    let json = dir.path().join("eval.json");
    let args = ["eval", "--checkpoint", ck.to_str().unwrap(), "-n", "3", "--seed", "5", "--output", json.to_str().unwrap()];
    let o = hrlmi(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let from_cli: EvalReport = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let checkpoint = Checkpoint::load(&ck).unwrap();
    let (in_process, _) = evaluate(&*checkpoint.policy(), &SimParams::default(), UserProfile::ALL, 3, 5).unwrap();
    assert_eq!(from_cli, in_process);

    let o = hrlmi(&["eval", "--checkpoint", ck.to_str().unwrap(), "-n", "0", "--profile", "resistant"], dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("no episodes were run"));
}

#[test]
fn checkpoint_version_mismatch_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = train_tiny(dir.path(), &[]);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("checkpoint.json")).unwrap()).unwrap();
    v["layout_version"] = 7.into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = hrlmi(&["eval", "--checkpoint", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("version mismatch"));
}

#[test]
fn exports_are_idempotent_and_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let run = train_tiny(dir.path(), &[]);
    for fig in ["2", "3", "4"] {
        let o = hrlmi(&["export", "--run-dir", run.to_str().unwrap(), "--figure", fig], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let path = PathBuf::from(String::from_utf8(o.stdout).unwrap().trim());
        let first = std::fs::read(&path).unwrap();
        hrlmi(&["export", "--run-dir", run.to_str().unwrap(), "--figure", fig], dir.path());
        assert_eq!(std::fs::read(&path).unwrap(), first);
    }
    let text = std::fs::read_to_string(run.join("exports/fig3_act_distribution.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 13);
    for col in 2..10 {
        let s: f64 = rows.iter().map(|r| r[col].parse::<f64>().unwrap()).sum();
        assert!(s == 0.0 || (s - 1.0).abs() <= 1e-12, "column {col} sums to {s}");
    }
}

#[test]
fn session_transcript_replays_to_the_shown_total() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("talk.jsonl");
    let mut child = Command::new(env!("CARGO_BIN_EXE_hrlmi"))
        .args(["session", "--profile", "open", "--seed", "3", "--transcript", transcript.to_str().unwrap()])
        .env("HRLMI_OUT", dir.path())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // Feelings first, then a garbage line, then plenty of answers for a full session.
    let mut input = String::from("3\nwhat\n");
    input.push_str(&"4\n5\n3\n".repeat(20));
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("reward +50 (total 50)"), "{stdout}");
    assert!(stdout.contains("not a menu entry"));
    let traces = read_traces_jsonl(std::io::BufReader::new(std::fs::File::open(&transcript).unwrap())).unwrap();
    assert_eq!(traces.len(), 1);
    let t = &traces[0];
    assert!(t.len() <= 40);
    assert_eq!(replay_total(t).unwrap(), t.total_reward);
    assert!(stdout.contains(&format!("total reward {}", t.total_reward)));
}
