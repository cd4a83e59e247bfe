use std::process::{Command, Output};

fn handover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_handover")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn demo_reports_message_sizes_and_key_agreement() {
    let o = handover(&["demo"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for line in ["REQ 104 bytes", "REP 88 bytes", "ACK 20 bytes", "total 212 bytes", "Ks agreement 5/5 sessions match"] {
        assert!(out.contains(line), "missing {line:?} in\n{out}");
    }
}

#[test]
fn demo_adversary_rejects_every_attack() {
    let o = handover(&["demo", "--adversary"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("all attacks rejected"));
    assert!(out.contains("ReplayDetected"));
}

#[test]
fn malformed_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scenario");
    std::fs::write(&path, "node lea kind=lea\nlink lea\n").unwrap();
    let o = handover(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unmet_expectation_exits_with_rejection_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.scenario");
    let mut text = String::from_utf8(handover(&["scenarios", "--canned", "honest"]).stdout).unwrap();
    text.push_str("expect rsu-1 handle_request ReplayDetected count=1\n");
    std::fs::write(&path, text).unwrap();
    let o = handover(&["run", "--scenario", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(dir.path().join("transcript.txt").exists());
}

#[test]
fn run_writes_transcript_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = handover(&["run", "--canned", "honest", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let t = std::fs::read_to_string(dir.path().join("transcript.txt")).unwrap();
    assert!(t.starts_with("seed=7\n"));
}

#[test]
fn audit_detects_substituted_identity() {
    let honest = handover(&["audit"]);
    assert_eq!(honest.status.code(), Some(0));
    assert!(stdout(&honest).contains("verdict Consistent"));
    let framed = handover(&["audit", "--substitute", "vn-1"]);
    assert_eq!(framed.status.code(), Some(0));
    assert!(stdout(&framed).contains("verdict Framed"));
}

#[test]
fn rotate_excludes_revoked_and_unupdated_vehicles() {
    let o = handover(&["rotate", "--vehicles", "3", "--revoke", "1", "--drop-update", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("vn-0,false,true,Accepted"));
    assert!(out.contains("vn-1,true,false,UnknownCredential"));
    assert!(out.contains("vn-2,false,false,UnknownCredential"));
}

#[test]
fn bench_with_no_offered_requests_is_infeasible() {
    let o = handover(&["bench", "--rate", "0"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(handover(&["frobnicate"]).status.code(), Some(2));
}
