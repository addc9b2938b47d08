use std::path::{Path, PathBuf};
use std::process::Command;

use kstab::corpus::corpus;
use kstab::io::{ArcSpec, FiltrationSpec, FunctionSpec, PolytopeSpec};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn kstab(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_kstab")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const HINGE: &str = r#"{"type":"toric","polytope":{"vertices":[["0"],["1"]]},
  "f":{"pieces":[{"linear":["0"],"constant":"0"},{"linear":["2"],"constant":"-1"}]}}"#;
const CONSTANT: &str = r#"{"type":"toric","polytope":{"vertices":[["0"],["1"]]},
  "f":{"pieces":[{"linear":["0"],"constant":"3"}]}}"#;
const BAD: &str = r#"{"type":"toric","polytope":{"vertices":[["0"],["1"]]},
  "f":{"pieces":[{"linear":["0"],"constant":"1/0"}]}}"#;

fn row(rep: &Value, k: u64) -> &Value {
    rep["rows"].as_array().unwrap().iter().find(|r| r["k"] == k).unwrap()
}

#[test]
fn fut_hinge() {
    let d = TempDir::new().unwrap();
    let p = write(&d, "hinge.json", HINGE);
    let r = kstab(&["fut", "--input", s(&p), "--kmax", "6"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    let rep = &v["report"];
    for k in [2, 4, 6] {
        assert_eq!(row(rep, k)["fut"]["exact"], "1/4");
        assert_eq!(row(rep, k)["norm2"]["exact"], "5/48");
    }
    assert_eq!(rep["norm2_exact"]["exact"], "5/48");
    assert_eq!(rep["donaldson"]["exact"], "1/4");
    assert_eq!(v["seed"], 0);
}

#[test]
fn fut_constant_is_trivial() {
    let d = TempDir::new().unwrap();
    let p = write(&d, "c.json", CONSTANT);
    let r = kstab(&["fut", "--input", s(&p), "--format", "csv"]);
    assert_eq!(r.code, 0);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("# kstab fut seed=0"));
    assert_eq!(
        lines.next(),
        Some("k,d,w,s,fut,norm2,norm2_lemma,chow,spread,norm_inf,exact_series")
    );
    for l in lines {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(&cols[4..8], &["0", "0", "0", "0"]);
    }
}

#[test]
fn malformed_rational_exits_one() {
    let d = TempDir::new().unwrap();
    let p = write(&d, "bad.json", BAD);
    for cmd in ["fut", "chow", "norm", "transform", "witness"] {
        let r = kstab(&[cmd, "--input", s(&p)]);
        assert_eq!(r.code, 1, "{cmd}");
        assert!(r.stderr.contains("f.pieces[0].constant"), "{}", r.stderr);
        assert!(r.stderr.contains("line 2"), "{}", r.stderr);
        assert!(r.stdout.is_empty());
    }
    let r = kstab(&["fut"]);
    assert_eq!(r.code, 1);
    let r = kstab(&["fut", "--input", s(&p), "--kmin", "4", "--kmax", "2"]);
    assert_eq!(r.code, 1);
    let r = kstab(&["nonsense"]);
    assert_eq!(r.code, 1);
}

#[test]
fn filt1_norm_decays() {
    let d = TempDir::new().unwrap();
    let spec = &corpus(12)
        .unwrap()
        .into_iter()
        .find(|e| e.name == "normal-cone")
        .unwrap()
        .spec;
    let p = write(&d, "filt1.json", &serde_json::to_string(spec).unwrap());
    let r = kstab(&["norm", "--input", s(&p), "--kmax", "12"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = &r.json()["report"];
    assert_eq!(rep["verdict"], "zero-norm (trend)");
    assert_eq!(rep["norm2_exact"], Value::Null);
}

#[test]
fn chow_reports_instability_test() {
    let d = TempDir::new().unwrap();
    let p = write(&d, "hinge.json", HINGE);
    let v = kstab(&["chow", "--input", s(&p)]).json();
    let inst = &v["report"]["instability"];
    assert_eq!(inst["mean"]["exact"], "5/4");
    assert_eq!(inst["rows"].as_array().unwrap().len(), 6);
    let e = write(
        &d,
        "filt1.json",
        &serde_json::to_string(&corpus(6).unwrap()[9].spec).unwrap(),
    );
    let v = kstab(&["chow", "--input", s(&e)]).json();
    assert_eq!(v["report"]["instability"], Value::Null);
    let v = kstab(&["chow", "--input", s(&e), "--reference", "3"]).json();
    assert_eq!(v["report"]["instability"]["verdict"], "unstable-witness");
}

#[test]
fn transform_artifacts_reparse() {
    let d = TempDir::new().unwrap();
    let p = write(&d, "hinge.json", HINGE);
    let r = kstab(&["transform", "--input", s(&p), "--kmax", "4"]);
    assert_eq!(r.code, 0);
    let rep = &r.json()["report"];
    let g: FunctionSpec = serde_json::from_value(rep["transform"].clone()).unwrap();
    assert_eq!(g.pieces.len(), 2);
    for e in rep["envelopes"].as_array().unwrap() {
        serde_json::from_value::<FunctionSpec>(e["function"].clone()).unwrap();
    }
    let subs = rep["sublevels"].as_array().unwrap();
    assert_eq!(subs.len(), 5);
    for b in subs {
        if !b["body"].is_null() {
            serde_json::from_value::<PolytopeSpec>(b["body"].clone())
                .unwrap()
                .build()
                .unwrap();
        }
    }
    // G = max(1, 2x) at the top level covers the segment
    let top: PolytopeSpec = serde_json::from_value(subs[4]["body"].clone()).unwrap();
    assert_eq!(top.build().unwrap().vertices().len(), 2);
    let c = kstab(&["transform", "--input", s(&p), "--kmax", "2", "--format", "csv"]);
    assert_eq!(
        c.stdout,
        "# kstab transform seed=0\nk,x0,g,envelope\n1,0,1,1\n1,1,2,2\n2,0,1,1\n2,1/2,1,1\n2,1,2,2\n"
    );
    let t = write(&d, "c.json", CONSTANT);
    let v = kstab(&["transform", "--input", s(&t)]).json();
    assert_eq!(v["report"]["sublevels"].as_array().unwrap().len(), 5);
}

#[test]
fn witness_hinge() {
    let d = TempDir::new().unwrap();
    let p = write(&d, "hinge.json", HINGE);
    let v = kstab(&["witness", "--input", s(&p), "--lambda", "1/2"]).json();
    let rep = &v["report"];
    assert_eq!(rep["witness"]["vertex_index"], 1);
    assert_eq!(rep["witness"]["eps"], "1/4");
    assert_eq!(rep["threshold"]["exact"], "37/40");
    let v = kstab(&["witness", "--input", s(&p), "--lambda", "1"]).json();
    assert_eq!(v["report"]["witness"], Value::Null);
    let t = write(&d, "c.json", CONSTANT);
    let v = kstab(&["witness", "--input", s(&t)]).json();
    assert_eq!(v["report"]["witness"], Value::Null);
    assert_eq!(v["report"]["diagnostic"], "sublevel body is the whole polytope");
    let r = kstab(&["witness", "--input", s(&p), "--lambda", "1/0"]);
    assert_eq!(r.code, 1);
}

#[test]
fn bounds_sweep_is_seeded() {
    let a = kstab(&["bounds", "--seed", "7", "--trials", "30", "--kmax", "12"]);
    let b = kstab(&["bounds", "--seed", "7", "--trials", "30", "--kmax", "12"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let v = a.json();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["report"]["violations"], 0);
    assert!(v["report"]["rows"].as_array().unwrap().iter().all(|r| r["seed"] == 7));
    let c = kstab(&["bounds", "--seed", "8", "--trials", "30", "--kmax", "12"]);
    assert_ne!(a.stdout, c.stdout);
    let csv = kstab(&["bounds", "--seed", "7", "--trials", "3", "--format", "csv"]);
    assert!(csv
        .stdout
        .starts_with("# kstab bounds seed=7\nn,c,k,L,sum,bound,slack\n"));
}

#[test]
fn bounds_on_given_function() {
    let d = TempDir::new().unwrap();
    let zero = write(
        &d,
        "zero.json",
        r#"{"polytope":{"vertices":[["0","0"],["1","0"],["0","1"]]},"pieces":[{"linear":["0","0"],"constant":"0"}]}"#,
    );
    let v = kstab(&["bounds", "--input", s(&zero), "--kmax", "5"]).json();
    for r in v["report"]["rows"].as_array().unwrap() {
        assert_eq!(r["sum"], "0");
        assert_eq!(r["slack"], "0");
    }
    let one = write(
        &d,
        "one.json",
        r#"{"polytope":{"vertices":[["0","0"],["1","0"],["0","1"]]},"pieces":[{"linear":["1","1"],"constant":"1"}]}"#,
    );
    let r = kstab(&["bounds", "--input", s(&one), "--kmax", "8", "--lower", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = kstab(&["bounds", "--input", s(&one), "--lower", "2"]);
    assert_eq!(r.code, 1);
    let bad = write(&d, "bad.json", r#"{"pieces":[{"linear":["1"],"constant":"x"}]}"#);
    assert_eq!(kstab(&["bounds", "--input", s(&bad)]).code, 1);
}

#[test]
fn arc_matrix_and_families() {
    let d = TempDir::new().unwrap();
    let diag = write(
        &d,
        "diag.json",
        r#"{"type":"matrix","matrix":{"size":2,"entries":[[{"pow":0,"coef":"1"}],[],[],[{"pow":1,"coef":"1"}]]}}"#,
    );
    let v = kstab(&["arc", "--input", s(&diag)]).json();
    let rep = &v["report"];
    assert_eq!(rep["factorization"]["lambda"], serde_json::json!([0, 1]));
    assert_eq!(rep["flags_agree"], true);
    assert_eq!(rep["flag"]["dims"], serde_json::json!([1, 2]));
    let ident = write(
        &d,
        "id.json",
        r#"{"type":"matrix","matrix":{"size":2,"entries":[[[{"pow":0,"coef":"1"}],[]],[[],[{"pow":0,"coef":"1"}]]]}}"#,
    );
    let v = kstab(&["arc", "--input", s(&ident)]).json();
    assert_eq!(v["report"]["factorization"]["lambda"], serde_json::json!([0, 0]));
    assert_eq!(v["report"]["flag"]["dims"], serde_json::json!([2]));
    let sym = write(
        &d,
        "sym.json",
        r#"{"type":"sym-power","g1":{"size":2,"entries":[[{"pow":0,"coef":"1"}],[{"pow":1,"coef":"1"}],[],[{"pow":0,"coef":"1"}]]}}"#,
    );
    let r = kstab(&["arc", "--input", s(&sym), "--kmax", "5"]);
    assert_eq!(r.code, 0);
    assert!(r.json()["report"]["chow"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| x["holds"] == true));
    let singular = write(
        &d,
        "sing.json",
        r#"{"type":"matrix","matrix":{"size":1,"entries":[[]]}}"#,
    );
    assert_eq!(kstab(&["arc", "--input", s(&singular)]).code, 1);
    let bad = write(
        &d,
        "bad.json",
        r#"{"type":"matrix","matrix":{"size":1,"entries":[[{"pow":0,"coef":"1/0"}]]}}"#,
    );
    let r = kstab(&["arc", "--input", s(&bad)]);
    assert_eq!(r.code, 1);
    assert!(
        r.stderr.contains("field `matrix`") && r.stderr.contains("column 74"),
        "{}",
        r.stderr
    );
}

#[test]
fn arc_diagnostic_exit_code() {
    // per-degree matrices that do not come from one graded arc
    let d = TempDir::new().unwrap();
    let fam = write(
        &d,
        "fam.json",
        r#"{"type":"family","polytope":{"vertices":[["0"],["1"]]},"degrees":[
          {"k":1,"matrix":{"size":2,"entries":[[{"pow":0,"coef":"1"}],[],[],[{"pow":-2,"coef":"1"}]]}},
          {"k":2,"matrix":{"size":3,"entries":[[{"pow":-2,"coef":"1"}],[],[],[],[{"pow":-3,"coef":"1"}],[],[],[],[{"pow":-2,"coef":"1"}]]}},
          {"k":3,"matrix":{"size":4,"entries":[[{"pow":-3,"coef":"1"}],[],[],[],[],[{"pow":-4,"coef":"1"}],[],[],[],[],[{"pow":-3,"coef":"1"}],[],[],[],[],[{"pow":-5,"coef":"1"}]]}}]}"#,
    );
    let r = kstab(&["arc", "--input", s(&fam), "--kmax", "3"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert_eq!(r.json()["diagnostic"], true);
}

#[test]
fn arc_seeded_random_family() {
    let a = kstab(&["arc", "--seed", "3", "--size", "3"]);
    let b = kstab(&["arc", "--seed", "3", "--size", "3"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let v = a.json();
    assert_eq!(v["report"]["flags_agree"], true);
    assert_eq!(v["report"]["factorization"]["residual_order"], Value::Null);
    let spec: ArcSpec = serde_json::from_value(v["input"].clone()).unwrap();
    let p = {
        let d = TempDir::new().unwrap();
        let p = write(&d, "a.json", &serde_json::to_string(&spec).unwrap());
        let r = kstab(&["arc", "--input", s(&p), "--seed", "3", "--size", "3"]);
        r.json()["report"].clone()
    };
    assert_eq!(p, v["report"]);
}

#[test]
fn determinism_and_round_trip() {
    let d = TempDir::new().unwrap();
    for e in corpus(6).unwrap() {
        let p = write(
            &d,
            &format!("{}.json", e.name),
            &serde_json::to_string(&e.spec).unwrap(),
        );
        let a = kstab(&["fut", "--input", s(&p), "--seed", "5"]);
        let b = kstab(&["fut", "--input", s(&p), "--seed", "5"]);
        assert_eq!(a.stdout, b.stdout, "{}", e.name);
        let v = a.json();
        assert_eq!(v["seed"], 5);
        let spec: FiltrationSpec = serde_json::from_value(v["input"].clone()).unwrap();
        let q = write(
            &d,
            &format!("{}.again.json", e.name),
            &serde_json::to_string(&spec).unwrap(),
        );
        let c = kstab(&["fut", "--input", s(&q), "--seed", "5"]);
        assert_eq!(c.json()["report"], v["report"], "{}", e.name);
    }
}

#[test]
fn corpus_writes_one_file_per_job() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("runs");
    let r = kstab(&["corpus", "--kmax", "6", "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 13);
    assert!(names.iter().all(|n| n.ends_with(".json")));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out.join("segment-hinge.json")).unwrap()).unwrap();
    assert_eq!(row(&v["report"], 6)["fut"]["exact"], "1/4");
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["report"].as_array().unwrap().len(), 12);
    let again = kstab(&["corpus", "--kmax", "6"]);
    assert_eq!(again.stdout, std::fs::read_to_string(out.join("summary.json")).unwrap());
}
