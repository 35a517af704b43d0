mod common;

use std::path::Path;
use std::process::{Command, Output};

use patchbench::codec::{emit_maxpat, emit_wavir};
use patchbench::fixtures;

fn patchbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patchbench")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> String {
    let p = dir.join(name);
    std::fs::write(&p, bytes).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_each_route() {
    let tmp = tempfile::tempdir().unwrap();
    let maxpat = write(tmp.path(), "a.maxpat", &emit_maxpat(&fixtures::additive()).unwrap());
    let wavir = write(tmp.path(), "a.json", &emit_wavir(&fixtures::additive()).unwrap());
    let script = write(tmp.path(), "a.ps", fixtures::ADDITIVE_SCRIPT.as_bytes());

    for (file, cat) in [(&maxpat, "json-maxpat"), (&wavir, "json-wavir"), (&script, "patchscript")] {
        let o = patchbench(&["validate", file, "--category", cat]);
        assert!(o.status.success(), "{cat}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("well-formed: 6 nodes"), "{}", stdout(&o));
    }

    let o = patchbench(&["validate", &maxpat, "--category", "json-wavir"]);
    assert!(!o.status.success());
    let o = patchbench(&["validate", &maxpat, "--category", "maxpy"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-runner"));
    let o = patchbench(&["validate", &maxpat, "--category", "maxpy", "--runner", "cp {code} {out}"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn render_writes_a_wav_and_judges_it() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write(tmp.path(), "am.maxpat", &emit_maxpat(&fixtures::am()).unwrap());
    let out = tmp.path().join("am.wav");
    let o = patchbench(&["render", &file, "--out", out.to_str().unwrap(), "--judge", "am"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("\"status\": \"pass\""), "{text}");
    let buf = patchbench::render::read_wav(&out).unwrap();
    assert_eq!(buf.len(), 88_200);

    let silent = write(tmp.path(), "s.maxpat", &emit_maxpat(&fixtures::silence()).unwrap());
    let o = patchbench(&["render", &silent, "--out", out.to_str().unwrap(), "--judge", "AM synthesis"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"status\": \"fail\""));
}

#[test]
fn generate_report_and_refuse_overwrite() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = common::corpus_dir();
    let config = serde_json::json!({
        "categories": ["patchscript"],
        "benchmarks": ["additive", "fm"],
        "n": 3,
        "seed": 0,
        "model": "replay-corpus",
        "cache_dir": corpus.join("cache"),
    });
    let cfg = write(tmp.path(), "config.json", config.to_string().as_bytes());
    let runs = tmp.path().join("runs");
    let args = ["generate", "--config", &cfg, "--runs-dir", runs.to_str().unwrap(), "--run-id", "r"];
    let o = patchbench(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("patchscript: n=6"));

    let o = patchbench(&args);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("already holds a run"));

    let run = runs.join("r");
    let csv = stdout(&patchbench(&["report", run.to_str().unwrap(), "--format", "csv"]));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(csv, std::fs::read_to_string(run.join("report.csv")).unwrap());
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&patchbench(&["report", run.to_str().unwrap(), "--format", "json"]))).unwrap();
    assert_eq!(json["run_id"], "r");
    assert!(stdout(&patchbench(&["report", run.to_str().unwrap()])).contains("patchscript"));
}
