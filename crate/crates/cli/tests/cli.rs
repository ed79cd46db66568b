use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const F: &str = r#"{"pieces":[{"len":"1","val":"3"},{"len":"2","val":"1"}],"tail":"0"}"#;
const G: &str = r#"{"pieces":[{"len":"2","val":"2"},{"len":"1","val":"1"}],"tail":"0"}"#;
const RAISED: &str = r#"{"pieces":[{"len":"1","val":"1"},{"len":"1","val":"2"}],"tail":"0"}"#;

fn majorn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_majorn")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let files = Files { dir: TempDir::new().unwrap() };
        files.put("f.json", F);
        files.put("g.json", G);
        files.put("raised.json", RAISED);
        files
    }

    fn put(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

#[test]
fn mu_sorts_pieces() {
    let t = Files::new();
    let o = majorn(&["mu", &t.arg("raised.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["pieces"][0]["val"], "2");
    assert_eq!(v["pieces"][1]["val"], "1");
}

#[test]
fn check_reports_certificate_and_exit_code() {
    let t = Files::new();
    let o = majorn(&["check", "--kind", "head-weak", "--r", "1", &t.arg("f.json"), &t.arg("g.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["certificate"]["holds"], true);

    let o = majorn(&["check", "--kind", "tail-weak", "--r", "1", &t.arg("f.json"), &t.arg("g.json")]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["certificate"]["holds"], false);
    assert!(v["certificate"]["witness"].is_string());
}

#[test]
fn usage_errors_exit_2() {
    let t = Files::new();
    assert_eq!(majorn(&["check", "--kind", "sideways", &t.arg("f.json"), &t.arg("g.json")]).status.code(), Some(2));
    assert_eq!(majorn(&["verify", "--lemma", "no-such-lemma"]).status.code(), Some(2));
    assert_eq!(majorn(&["frobnicate"]).status.code(), Some(2));
    let o = majorn(&["mu", &t.arg("missing.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
}

#[test]
fn partition_writes_verified_output() {
    let t = Files::new();
    let out = t.arg("part.json");
    let o = majorn(&["partition", "--lemma", "head", &t.arg("f.json"), &t.arg("g.json"), "-o", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["verified"], true);
    assert_eq!(v["lemma"], "head");
}

#[test]
fn partition_rejects_unsorted_input_as_precondition() {
    let t = Files::new();
    let o = majorn(&["partition", "--lemma", "head", &t.arg("f.json"), &t.arg("raised.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("precondition"));
}

#[test]
fn seq_partition_on_sequences() {
    let t = Files::new();
    let a = t.put("a.json", r#"{"entries":["3","1","1"]}"#);
    let b = t.put("b.json", r#"{"entries":["2","2"]}"#);
    let o = majorn(&["partition", "--lemma", "seq", &a, &b]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verified"], true);
}

#[test]
fn synth_then_opnorm_round_trip() {
    let t = Files::new();
    let op = t.arg("op.json");
    let o = majorn(&["synth", "--lemma", "head-weak", "--r", "1", &t.arg("f.json"), &t.arg("g.json"), "-o", &op]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let check = json(&o);
    assert_eq!(check["apply_exact"], true);

    let o = majorn(&["opnorm", &op, "--p", "1", "--p", "inf"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["p"], "1");
    // the synth report measured the same operator
    assert_eq!(entries[0]["hi"], check["checks"][0]["observed"]["hi"]);
}

#[test]
fn kfun_l0lq_value() {
    let t = Files::new();
    // best h removes the top unit of support; what is left is ∫_1^3 1^2 = 2
    let o = majorn(&["kfun", "--couple", "l0lq", "--q", "2", "--t", "1", &t.arg("f.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["value"], "2");
}

#[test]
fn decompose_writes_parts() {
    let t = Files::new();
    let out = t.arg("split.json");
    let o = majorn(&["decompose", "--p", "1", "--q", "2", &t.arg("f.json"), &t.arg("g.json"), "-o", &out]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["additive"], true);
    let d: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(d["g1"]["pieces"].is_array() && d["g2"]["pieces"].is_array());
}

#[test]
fn probe_family_replays_as_fail() {
    let t = Files::new();
    let fam = t.arg("family.json");
    let o = majorn(&["probe", "--oracle", "linf", "--kind", "tail-weak", "--samples", "20", "--family-out", &fam]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["divergent"], true);
    let o = majorn(&["replay", &fam]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "fail");

    let o = majorn(&["probe", "--oracle", "lp", "--p", "2", "--kind", "tail-weak", "--samples", "50", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["divergent"], false);
}

#[test]
fn boyd_and_conj() {
    let o = majorn(&["boyd", "--oracle", "lp:2", "--kmax", "256"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((json(&o)["slope"].as_f64().unwrap() - 0.5).abs() < 0.05);

    let o = majorn(&["conj", "--oracle", "lp:2", "--q", "1", "--samples", "20", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["tail_part"]["unbounded"], true);
}

fn verify(dir: &Path, tag: &str, threads: &str) -> (Output, String, String) {
    let (j, c) = (dir.join(format!("{tag}-{threads}.json")), dir.join(format!("{tag}-{threads}.csv")));
    let o = majorn(&[
        "verify",
        "--lemma",
        tag,
        "--samples",
        "10",
        "--seed",
        "5",
        "--threads",
        threads,
        "-o",
        j.to_str().unwrap(),
        "--csv",
        c.to_str().unwrap(),
    ]);
    (o, fs::read_to_string(j).unwrap(), fs::read_to_string(c).unwrap())
}

#[test]
fn verify_is_deterministic_and_prints_a_table() {
    let t = Files::new();
    let (o, j1, c1) = verify(t.dir.path(), "second-operator", "1");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS: 30 pass"));
    let (_, j2, c2) = verify(t.dir.path(), "second-operator", "2");
    assert_eq!(j1, j2);
    assert_eq!(c1, c2);
    assert!(c1.starts_with("id,variant,status,"));
    let report: serde_json::Value = serde_json::from_str(&j1).unwrap();
    assert_eq!(report["lemma"], "synth-tail-eq");
    assert_eq!(report["total"], 30);
}

#[test]
fn verify_with_exponents_and_empty_campaign() {
    let o = majorn(&["verify", "--lemma", "first-operator", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let o = majorn(&["verify", "--lemma", "decompose", "--samples", "3", "--exponents", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p=1 q=2"));
}

#[test]
fn replay_errors() {
    let t = Files::new();
    let bad = t.put("bad.json", "{\n  \"lemma\": \"rearrange\",\n");
    let o = majorn(&["replay", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn lemmas_lists_tags_and_aliases() {
    let o = majorn(&["lemmas"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("cv-comparison") && s.contains("first-operator"));
}
