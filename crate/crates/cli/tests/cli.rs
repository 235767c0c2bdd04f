//! End-to-end checks of the `reqspec` binary against the fixtures in
//! `tests/fixtures`. JSON outputs are compared with files in `tests/golden`;
//! run with `BLESS=1` to rewrite them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reqspec"))
        .args(args)
        .current_dir(tests_dir())
        .env_remove("REQSPEC_CONFIG")
        .output()
        .expect("spawn reqspec")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn golden(name: &str, actual: &str) {
    let path = tests_dir().join("golden").join(name);
    if std::env::var_os("BLESS").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "output differs from {name}");
}

const CORPUS: &str = "fixtures/corpus";
const REG: &str = "fixtures/registry.txt";
const LEX: &str = "fixtures/lexicon.json";

fn query(kind: &str, proc_: &str, extra: &[&str]) -> Output {
    let mut args = vec!["--format", "json", "query", kind, CORPUS, "--registry", REG, "--lexicon", LEX, "--proc", proc_];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn validate_clean_corpus() {
    let o = run(&["validate", CORPUS, "--registry", REG]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn unbalanced_tag_reports_file_and_line() {
    let o = run(&["validate", "fixtures/broken/unbalanced.spec", "--registry", REG]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("fixtures/broken/unbalanced.spec:3"), "{}", stdout(&o));
    assert!(stdout(&o).contains("UnbalancedTag"));
}

#[test]
fn unregistered_development_is_named() {
    let o = run(&["validate", "fixtures/broken/unregistered.spec", "--registry", REG]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("CB00ZZZZ"), "{}", stdout(&o));
}

#[test]
fn validate_json_errors() {
    let o = run(&["--format", "json", "validate", "fixtures/broken", "--registry", REG]);
    assert_eq!(code(&o), 2);
    golden("validate_broken.jsonl", &stdout(&o));
}

#[test]
fn resolve_before_development_lands() {
    let o = run(&["--format", "json", "resolve", CORPUS, "--registry", REG, "--id", "REQ_A2_0001", "--release", "01R1"]);
    assert_eq!(code(&o), 0);
    golden("resolve_01R1.json", &stdout(&o));
    assert!(stdout(&o).contains("fixed at 3 dB"));
}

#[test]
fn resolve_after_development_lands() {
    let o = run(&["resolve", CORPUS, "--registry", REG, "--id", "REQ_A2_0001", "--release", "01R2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("maxA2Offset"));
    assert!(!stdout(&o).contains("3 dB"));
}

#[test]
fn resolve_deployment_filter() {
    let args = ["resolve", CORPUS, "--registry", REG, "--id", "REQ_A2_0002", "--release", "01R1", "--deployment"];
    let sa = run(&[&args[..], &["SA"]].concat());
    assert_eq!(code(&sa), 0);
    assert!(stdout(&sa).contains("standalone"));
    assert!(!stdout(&sa).contains("anchor"));
    let nsa = run(&[&args[..], &["NSA"]].concat());
    assert!(stdout(&nsa).contains("anchor"));
    assert!(!stdout(&nsa).contains("standalone"));
}

#[test]
fn resolve_unknown_requirement() {
    let o = run(&["resolve", CORPUS, "--registry", REG, "--id", "REQ_NOPE_0001", "--release", "01R1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn lint_json_matches_golden() {
    let o = run(&["--format", "json", "lint", CORPUS, "--registry", REG, "--lexicon", LEX, "--fail-on", "none"]);
    assert_eq!(code(&o), 0);
    golden("lint.jsonl", &stdout(&o));
}

#[test]
fn lint_threshold_sets_exit_code() {
    let base = ["lint", CORPUS, "--registry", REG, "--lexicon", LEX, "--fail-on"];
    assert_eq!(code(&run(&[&base[..], &["high"]].concat())), 1);
    assert_eq!(code(&run(&[&base[..], &["none"]].concat())), 0);
}

#[test]
fn low_findings_pass_a_high_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let mut src = String::from("%name spread\n");
    let texts = ["The A2 measurement is configured by the network.", "Each report of the A2 measurement is logged.", "Gaps apply to the A2 measurement only."];
    for (s, text) in texts.iter().enumerate() {
        src.push_str(&format!(
            "# Section {s}\n=== REQ REQ_SP_000{s} ===\n--- VERSION first=01R1 last=open ---\n{text}\n=== END ===\n"
        ));
    }
    fs::write(dir.path().join("spread.spec"), src).unwrap();
    let lex = tests_dir().join(LEX);
    let target = dir.path().to_str().unwrap();
    let json = run(&["--format", "json", "lint", target, "--lexicon", lex.to_str().unwrap(), "--fail-on", "high"]);
    assert_eq!(code(&json), 0, "{}", stdout(&json));
    assert!(stdout(&json).contains("L5_Dispersion"));
    let low = run(&["lint", target, "--lexicon", lex.to_str().unwrap(), "--fail-on", "low"]);
    assert_eq!(code(&low), 1);
}

#[test]
fn lint_injected_duplicate_fails_high() {
    let dir = tempfile::tempdir().unwrap();
    let text = (0..40).map(|i| format!("word{i}")).collect::<Vec<_>>().join(" ") + ".";
    let src = format!(
        "%name dup\n# S\n=== REQ REQ_D_0001 ===\n--- VERSION first=01R1 last=open ---\n{text}\n=== END ===\n\
         === REQ REQ_D_0002 ===\n--- VERSION first=01R1 last=open ---\n{text}\n=== END ===\n"
    );
    fs::write(dir.path().join("dup.spec"), src).unwrap();
    let o = run(&["--format", "json", "lint", dir.path().to_str().unwrap(), "--fail-on", "high"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("L1_Duplication"));
}

#[test]
fn lint_config_overrides_and_rejects() {
    let strict = run(&[
        "--format", "json", "lint", CORPUS, "--registry", REG, "--lexicon", LEX, "--config", "fixtures/strict.json", "--fail-on", "none",
    ]);
    assert_eq!(code(&strict), 0);
    assert!(stdout(&strict).contains("over-length"));
    let bad = run(&["lint", CORPUS, "--registry", REG, "--lexicon", LEX, "--config", "fixtures/invalid.json"]);
    assert_eq!(code(&bad), 2);
    let missing = run(&["lint", CORPUS, "--registry", REG, "--lexicon", LEX, "--config", "fixtures/nope.json"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn query_behavior_golden() {
    let o = query("behavior", "A2 measurement", &["--release", "01R2"]);
    assert_eq!(code(&o), 0);
    golden("behavior_a2_01R2.jsonl", &stdout(&o));
}

#[test]
fn query_diff_golden() {
    let o = query("diff", "cell reselection", &["--from", "01R1", "--to", "01R2"]);
    assert_eq!(code(&o), 0);
    golden("diff_reselection.jsonl", &stdout(&o));
}

#[test]
fn query_diff_same_release_is_empty() {
    let o = query("diff", "A2 measurement", &["--from", "01R2", "--to", "01R2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "");
}

#[test]
fn query_dev_golden() {
    let o = query("dev", "A2 measurement", &["--dev", "CB00XXXX"]);
    assert_eq!(code(&o), 0);
    golden("dev_cb00xxxx.jsonl", &stdout(&o));
}

#[test]
fn query_aliases_match_canonical() {
    let canonical = query("reqs", "cell reselection", &[]);
    let alias = query("reqs", "reselection of cells", &[]);
    assert_eq!(code(&canonical), 0);
    assert!(!stdout(&canonical).is_empty());
    assert_eq!(stdout(&canonical), stdout(&alias));
}

#[test]
fn query_unknown_entities() {
    assert_eq!(code(&query("behavior", "A2 measurement", &["--release", "09R9"])), 3);
    assert_eq!(code(&query("dev", "A2 measurement", &["--dev", "CB00QQQQ"])), 3);
}

#[test]
fn index_round_trip_answers_queries() {
    let dir = tempfile::tempdir().unwrap();
    let ix = dir.path().join("index.json");
    let ix = ix.to_str().unwrap();
    let built = run(&["index", "build", CORPUS, "--registry", REG, "--lexicon", LEX, "--out", ix]);
    assert_eq!(code(&built), 0, "{}", stderr(&built));
    let from_index = run(&["--format", "json", "query", "deployment", "--index", ix, "--proc", "A2 measurement", "--dep", "SA"]);
    assert_eq!(code(&from_index), 0);
    golden("deployment_a2_sa.jsonl", &stdout(&from_index));
    let direct = query("deployment", "A2 measurement", &["--dep", "SA"]);
    assert_eq!(stdout(&from_index), stdout(&direct));
    assert!(!stdout(&direct).contains("anchor"));
}

#[test]
fn extract_writes_release_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["extract", CORPUS, "--registry", REG, "--all", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for r in ["01R1", "01R2"] {
        let body = fs::read_to_string(dir.path().join(format!("{r}.jsonl"))).unwrap();
        for line in body.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["release"], r);
            assert_ne!(v["id"], "REQ_MEAS_HDR");
        }
    }
    let r1 = fs::read_to_string(dir.path().join("01R1.jsonl")).unwrap();
    assert!(r1.contains("3 dB") && !r1.contains("maxA2Offset"));
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert!(stats.is_object());
}

#[test]
fn extract_unknown_release() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["extract", CORPUS, "--registry", REG, "--release", "07R1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = walkdir::WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().is_file())
        .map(|e| (e.path().strip_prefix(dir).unwrap().to_path_buf(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn gen_corpus_is_deterministic_and_lintable() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run(&["gen-corpus", "--seed", "9", "--requirements", "80", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let snap = snapshot(a.path());
    assert!(snap.iter().any(|(p, _)| p.ends_with("ground_truth.json")));
    assert_eq!(snap, snapshot(b.path()));
    let docs = a.path().join("docs");
    let reg = a.path().join("registry.txt");
    let v = run(&["validate", docs.to_str().unwrap(), "--registry", reg.to_str().unwrap()]);
    assert_eq!(code(&v), 0, "{}", stderr(&v));
}

#[test]
fn unknown_procedure_is_empty() {
    let o = query("reqs", "no such procedure", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "");
}
