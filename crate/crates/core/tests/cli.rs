use std::process::Command;

use dynsched::model::parse_trace;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

const HEADER: &str = "impl,n,r,q,sparsity,seed,total_ns,mean_insert_ns,mean_remove_ns,mean_query_ns,dashed_traversed,restructure_steps,peak_live,max_overlap_d";

#[test]
fn csv_has_one_row_per_impl() {
    let out = bench().args(["--n", "300", "--seed", "7", "--repeats", "1"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    let impls: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(impls, ["naive", "cf", "lt"]);
    for l in &lines[1..] {
        assert_eq!(l.split(',').nth(1), Some("300"));
    }
}

#[test]
fn general_mode_skips_lt_and_rejects_it_explicitly() {
    let out = bench()
        .args(["--n", "200", "--mode", "general", "--repeats", "1", "--verify"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(!text.contains("\nlt,"));

    let out = bench().args(["--n", "50", "--mode", "general", "--impl", "lt"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_round_trips_through_replay() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("events.txt");
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");

    let out = bench()
        .args(["--n", "250", "--seed", "3", "--impl", "cf", "--repeats", "1"])
        .arg("--trace")
        .arg(&trace)
        .arg("--csv")
        .arg(&csv_a)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let events = parse_trace(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(events.len(), 500);

    let out = bench()
        .args(["--impl", "cf", "--repeats", "1", "--verify", "--audit"])
        .arg("--replay")
        .arg(&trace)
        .arg("--csv")
        .arg(&csv_b)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // Counters are deterministic; timings are not.
    let counters = |p: &std::path::Path| -> Vec<String> {
        let text = std::fs::read_to_string(p).unwrap();
        let row = text.lines().nth(1).unwrap().to_string();
        let f: Vec<&str> = row.split(',').collect();
        vec![f[10].to_string(), f[11].to_string(), f[12].to_string(), f[13].to_string()]
    };
    assert_eq!(counters(&csv_a), counters(&csv_b));
}

#[test]
fn adversarial_run_verifies() {
    let out = bench()
        .args(["--adversarial", "5", "200", "--verify", "--repeats", "1", "--impl", "cf"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("cf,"));
}

#[test]
fn bad_trace_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bad.txt");
    std::fs::write(&trace, "I 1 0 10\nI 2 5 5\n").unwrap();
    let out = bench().arg("--replay").arg(&trace).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
