use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn genlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_vee() -> PathBuf {
    let path = std::env::temp_dir().join(format!("genlab-vee-{}.json", std::process::id()));
    fs::write(
        &path,
        r#"{ "elements": ["a", "b", "1"], "leq": [["a","1"], ["b","1"]] }"#,
    )
    .unwrap();
    path
}

#[test]
fn reg_reports_separativity_and_validities() {
    let poset = write_vee();
    let out = genlab(&["reg", poset.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("separative: true"));
    assert!(text.contains("atoms: 2"));
    assert!(text.contains("validities: 1,1,1"));

    let out = genlab(&["--format", "json", "reg", poset.to_str().unwrap()]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["schema"], "genlab/1");
    assert_eq!(value["atoms"], 2);
}

#[test]
fn reg_rejects_chains_and_bad_input() {
    let path = std::env::temp_dir().join(format!("genlab-chain-{}.json", std::process::id()));
    fs::write(&path, r#"{ "elements": ["a", "1"], "leq": [["a","1"]] }"#).unwrap();
    let out = genlab(&["reg", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("separative: false"));

    let empty = std::env::temp_dir().join(format!("genlab-empty-{}.json", std::process::id()));
    fs::write(&empty, r#"{ "elements": [], "leq": [] }"#).unwrap();
    let out = genlab(&["reg", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn born_is_byte_identical_across_runs() {
    let args = [
        "--format", "csv", "--seed", "7", "born", "--q", "0.5", "--n", "512", "--mmax", "5",
        "--nmax", "32", "--policy", "seeded",
    ];
    let first = genlab(&args);
    let second = genlab(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.starts_with("step,bit,running_mean"));
    assert_eq!(text.lines().count(), 513);
}

#[test]
fn born_lex_mmax_zero_is_all_zero_with_empty_certificate() {
    let cert = std::env::temp_dir().join(format!("genlab-cert-{}.json", std::process::id()));
    let out = genlab(&[
        "--format",
        "csv",
        "born",
        "--q",
        "0.5",
        "--n",
        "16",
        "--mmax",
        "0",
        "--nmax",
        "0",
        "--out-cert",
        cert.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0"));
    }
    let cert_value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(cert_value["families_total"], 0);
}

#[test]
fn exit_codes() {
    // input error
    let out = genlab(&["born", "--q", "1.5", "--n", "16"]);
    assert_eq!(out.status.code(), Some(2));
    // cap refusal
    let out = genlab(&["--cap-seconds", "0.000001", "psys", "@spin:3", "conditions"]);
    assert_eq!(out.status.code(), Some(3));
    // csv where undefined
    let poset = write_vee();
    let out = genlab(&["--format", "csv", "reg", poset.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn psys_builtin_systems() {
    let out = genlab(&["psys", "@malley", "malley"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("conditions: 9; maximal: 4; atoms: 4"));

    let out = genlab(&["psys", "@spin:3", "reductive"]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("reductive: true"));

    let out = genlab(&["psys", "@ks18", "ultra"]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("none (exhaustive)"));
}

#[test]
fn quantum_export_round_trips_into_psys() {
    let path = std::env::temp_dir().join(format!("genlab-spin-{}.json", std::process::id()));
    let out = genlab(&[
        "quantum",
        "spin",
        "--directions",
        "1,0,0;0,0,1",
        "--export",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = genlab(&["psys", path.to_str().unwrap(), "conditions"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("conditions: 9"), "{text}");
}

#[test]
fn force_and_collapse() {
    let poset = write_vee();
    let out = genlab(&[
        "--seed",
        "5",
        "force",
        poset.to_str().unwrap(),
        "--corpus",
        "30",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("discrepancies: 0"));

    let out = genlab(&["collapse", "--nodes", "3", "--edges", "0<1,0<2,1<2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2 -> {{},{{}}}"));

    let out = genlab(&["collapse", "--nodes", "2", "--edges", "0<1,1<0"]);
    assert_eq!(out.status.code(), Some(2));
}
