use std::process::{Command, Output};

use serde_json::Value;

fn tmis_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmis-lab")).args(args).env_remove("TMIS_LAB_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn honest_run_prints_a_json_transcript() {
    let out = tmis_lab(&["run", "--scheme", "xu2014", "--seed", "7", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["scheme", "outcome", "failure_step", "session_keys", "messages", "counters", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["scheme"], "xu2014");
    assert_eq!(v["outcome"], "MutualAuthSuccess");
    assert_eq!(v["seed"], 7);
}

#[test]
fn same_arguments_give_identical_output() {
    for args in [
        &["run", "--scheme", "lin2013", "--seed", "11"][..],
        &["attack", "--scheme", "caozhai2013", "--scenario", "temp_info_leak", "--trials", "5", "--format", "json"][..],
    ] {
        let a = tmis_lab(args);
        let b = tmis_lab(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_can_come_from_the_environment() {
    let flag = tmis_lab(&["run", "--scheme", "wei2012", "--seed", "3", "--format", "json"]);
    let env = Command::new(env!("CARGO_BIN_EXE_tmis-lab"))
        .args(["run", "--scheme", "wei2012", "--format", "json"])
        .env("TMIS_LAB_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn attack_report_matches_the_reference() {
    let out = tmis_lab(&[
        "attack",
        "--scheme",
        "wei2012",
        "--scenario",
        "dos_via_password_change",
        "--trials",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["vulnerable"], true);
    assert_eq!(v["matches_reference"], true);
    assert_eq!(v["trials"], 3);
    assert!(v.get("trial_records").is_none());
}

#[test]
fn verbose_attack_includes_trial_records() {
    let out = tmis_lab(&[
        "attack",
        "--scheme",
        "xie2013",
        "--scenario",
        "replay_login",
        "--trials",
        "2",
        "--verbose",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["trial_records"].as_array().unwrap().len(), 2);
    assert_eq!(v["failure_step"], "C_1");
}

#[test]
fn matrix_disagreement_exits_with_two() {
    let out = tmis_lab(&["matrix", "--trials", "2", "--format", "markdown"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("| Replay attack"));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["bogus"][..],
        &["run", "--scheme", "nope2020"][..],
        &["attack", "--scheme", "wei2012", "--scenario", "temp_info_leak"][..],
        &["attack", "--scheme", "wei2012", "--scenario", "tamper_login", "--tamper", "lin_rehash_R"][..],
        &["matrix", "--trials", "0"][..],
        &["run", "--scheme", "wei2012", "--delta-t", "0"][..],
    ] {
        let out = tmis_lab(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(tmis_lab(&["--help"]).status.code(), Some(0));
    assert_eq!(tmis_lab(&["--version"]).status.code(), Some(0));
}

#[test]
fn list_names_every_scheme() {
    let out = tmis_lab(&["list", "--format", "json"]);
    let v = json(&out);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["scheme"].as_str().unwrap()).collect();
    assert_eq!(names, ["wei2012", "zhu2012", "leeliu2013", "lin2013", "caozhai2013", "xie2013", "xu2014"]);
}
