//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reqspec::dataset::{extract_all, naive_dump_bytes, write_datasets, DatasetConfig};
use reqspec::diff::SegmentKind;
use reqspec::index::{
    build_index, query_behavior, query_deployment, query_dev_changes, query_release_diff, query_requirements, IndexEntry,
    SpecIndex,
};
use reqspec::lexicon::{load_lexicon, Lexicon};
use reqspec::lint::{lint_corpus, LintConfig, LintFinding, Rule, Severity};
use reqspec::resolver::{baseline, materialize, release_universe};
use reqspec::synth::{generate, random_document, random_registry, random_requirement, GroundTruth, SynthConfig, TruthEntry};
use reqspec::tags::contains_tag;
use reqspec::tokenizer::{tokenize, TokenKind};
use reqspec::{parse_document, parse_registry, serialize, DeploymentScope, DeploymentType, DevelopmentRegistry, SpecDocument};

/// Minimum shingle Jaccard of every injected near-duplicate pair.
const DUP_MIN_JACCARD: f64 = 0.8;
const BASELINE_SAMPLES: usize = 600;
const ROUND_TRIP_SAMPLES: usize = 600;
const SYMMETRY_SAMPLES: usize = 100;
const FUZZ_CHARS: usize = 10_000;

struct Seeded {
    docs: Vec<SpecDocument>,
    reg: DevelopmentRegistry,
    lex: Lexicon,
    truth: GroundTruth,
}

fn seeded() -> Seeded {
    let c = generate(&SynthConfig::default()).expect("default settings are valid");
    Seeded {
        docs: c.documents.iter().map(|d| parse_document(&d.source).expect("generated corpus parses")).collect(),
        reg: parse_registry(&c.registry).expect("generated registry parses"),
        lex: load_lexicon(&c.lexicon).expect("generated lexicon loads"),
        truth: c.truth,
    }
}

const SCOPES: [DeploymentScope; 3] =
    [DeploymentScope::Both, DeploymentScope::Only(DeploymentType::SA), DeploymentScope::Only(DeploymentType::NSA)];

fn baselining_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checks = 0;
    for i in 0..BASELINE_SAMPLES {
        let reg = random_registry(&mut rng, 6, 4);
        let universe: Vec<_> = reg.releases().into_iter().collect();
        let req = random_requirement(&mut rng, &format!("REQ_B_{i:04}"), &reg, 4);
        let open = req.open_version().expect("random requirements end open");
        let devs: Vec<_> = reqspec::model::dev_ids(&open.content).into_iter().cloned().collect();
        if !(1..=3).contains(&devs.len()) {
            return Err(format!("generator produced {} DevBlocks", devs.len()));
        }
        for d in &devs {
            let based = baseline(&req, d, &reg).map_err(|e| e.to_string())?;
            for &r in &universe {
                for scope in SCOPES {
                    let a = materialize(&req, r, scope, &reg).map_err(|e| e.to_string())?.map(|x| x.text);
                    let b = materialize(&based, r, scope, &reg).map_err(|e| e.to_string())?.map(|x| x.text);
                    if a != b {
                        return Err(format!("{} baselined on {d} differs at {r}: {a:?} vs {b:?}", req.id));
                    }
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{BASELINE_SAMPLES} requirements, {checks} text comparisons, 0 failures"))
}

fn round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let reg = random_registry(&mut rng, 6, 4);
    for i in 0..ROUND_TRIP_SAMPLES {
        let doc = random_document(&mut rng, &format!("doc{i}"), &reg);
        let text = serialize(&doc);
        let back = parse_document(&text).map_err(|e| format!("doc{i} does not re-parse: {:?}", e[0]))?;
        if back != doc {
            return Err(format!("doc{i} changed after serialize/parse"));
        }
        if serialize(&back) != text {
            return Err(format!("doc{i} serializes differently the second time"));
        }
    }
    Ok(format!("{ROUND_TRIP_SAMPLES} documents, 0 failures"))
}

fn purity(s: &Seeded) -> Result<String, String> {
    let universe = release_universe(&s.docs, &s.reg);
    let mut texts = 0;
    for doc in &s.docs {
        for req in doc.requirements() {
            for &r in &universe {
                for scope in SCOPES {
                    if let Some(res) = materialize(req, r, scope, &s.reg).map_err(|e| e.to_string())? {
                        if contains_tag(&res.text) {
                            return Err(format!("{} at {r} leaks a tag", req.id));
                        }
                        texts += 1;
                    }
                }
            }
        }
    }
    let mut records = 0;
    for ds in extract_all(&s.docs, &s.reg, &DatasetConfig::default()).map_err(|e| e.to_string())? {
        for rec in &ds.records {
            if contains_tag(&rec.text) {
                return Err(format!("dataset record {} at {} leaks a tag", rec.id, ds.release));
            }
            records += 1;
        }
    }
    Ok(format!("{texts} resolved texts and {records} dataset records are tag-free"))
}

fn ids_for(findings: &[LintFinding], rule: Rule) -> impl Iterator<Item = &LintFinding> {
    findings.iter().filter(move |f| f.rule == rule)
}

fn lint_ground_truth(s: &Seeded) -> Result<String, String> {
    let findings = lint_corpus(&s.docs, &s.reg, &s.lex, &LintConfig::default());
    let t = &s.truth;

    let unordered = |a: &str, b: &str| if a <= b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
    let found: BTreeSet<_> = ids_for(&findings, Rule::Duplication)
        .map(|f| unordered(&f.location.requirement, &f.related.as_ref().expect("pair finding").requirement))
        .collect();
    let injected: BTreeSet<_> = t.near_duplicates.iter().map(|p| unordered(&p.base, &p.copy)).collect();
    let recall = injected.intersection(&found).count();
    let false_pairs = found.difference(&injected).count();
    if recall != injected.len() || false_pairs != 0 || ids_for(&findings, Rule::Duplication).count() != found.len() {
        return Err(format!("L1 recall {recall}/{}, {false_pairs} false pairs", injected.len()));
    }
    if let Some(f) = ids_for(&findings, Rule::Duplication).find(|f| f.score.unwrap_or(0.0) < DUP_MIN_JACCARD) {
        return Err(format!("injected pair {} scores {:?} < {DUP_MIN_JACCARD}", f.location.requirement, f.score));
    }

    let l2: BTreeSet<_> = ids_for(&findings, Rule::Length).map(|f| f.location.requirement.clone()).collect();
    let l2_count = ids_for(&findings, Rule::Length).count();
    let over: BTreeSet<_> = t.over_length.iter().cloned().collect();
    if l2 != over || l2_count != over.len() {
        return Err(format!("L2 reported {l2_count} findings on {l2:?}, expected {over:?}"));
    }

    let l3: Vec<_> = ids_for(&findings, Rule::Standardization).map(|f| f.location.requirement.clone()).collect();
    let mut l3_sorted = l3.clone();
    l3_sorted.sort();
    let mut alias: Vec<_> = t.alias_usages.iter().map(|a| a.requirement.clone()).collect();
    alias.sort();
    if l3_sorted != alias {
        return Err(format!("L3 reported {} findings, expected {}", l3.len(), alias.len()));
    }

    let l5: BTreeSet<_> = ids_for(&findings, Rule::Dispersion).map(|f| f.message.split('`').nth(1).unwrap_or("").to_string()).collect();
    let dispersed: BTreeSet<_> = t.dispersed.iter().cloned().collect();
    if l5 != dispersed || ids_for(&findings, Rule::Dispersion).count() != dispersed.len() {
        return Err(format!("L5 reported {l5:?}, expected {dispersed:?}"));
    }

    let severities: Vec<Severity> = Rule::ALL.iter().map(|r| r.severity()).collect();
    let expected = [Severity::High, Severity::High, Severity::High, Severity::Medium, Severity::Low];
    if severities != expected || findings.iter().any(|f| f.severity != f.rule.severity()) {
        return Err(format!("severities {severities:?}"));
    }
    Ok(format!(
        "L1 {recall}/{} with 0 false pairs, L2 {l2_count}, L3 {}, L5 {}, severities High/High/High/Medium/Low",
        injected.len(),
        l3.len(),
        l5.len()
    ))
}

fn entries(v: &[TruthEntry]) -> Vec<IndexEntry> {
    v.iter().map(|e| IndexEntry { id: e.id.clone(), text: e.text.clone() }).collect()
}

fn diff_ids(ix: &SpecIndex, p: &str, a: reqspec::ReleaseId, b: reqspec::ReleaseId) -> Result<Vec<String>, String> {
    Ok(query_release_diff(ix, p, a, b).map_err(|e| e.to_string())?.into_iter().map(|d| d.id).collect())
}

/// Compares all five query forms for procedure name `asked` against the
/// ground truth of `canonical`.
fn check_queries(ix: &SpecIndex, t: &GroundTruth, asked: &str, canonical: &str) -> Result<usize, String> {
    let mut n = 0;
    let fail = |form: &str| Err(format!("{form} query for `{asked}` differs from ground truth"));
    let expected_reqs = t.proc_req.get(canonical).cloned().unwrap_or_default();
    if query_requirements(ix, asked) != expected_reqs {
        return fail("requirements");
    }
    n += 1;
    for &r in &t.releases {
        let expected = t.behavior.get(canonical).and_then(|m| m.get(&r)).map(|v| entries(v)).unwrap_or_default();
        if query_behavior(ix, asked, r).map_err(|e| e.to_string())? != expected {
            return fail("behavior");
        }
        n += 1;
    }
    for pair in t.release_diffs.get(canonical).into_iter().flatten() {
        if diff_ids(ix, asked, pair.from, pair.to)? != pair.changed {
            return fail("release diff");
        }
        n += 1;
    }
    for d in t.developments.keys() {
        let expected = t.dev_changes.get(canonical).and_then(|m| m.get(d)).cloned().unwrap_or_default();
        let got: Vec<String> = query_dev_changes(ix, asked, d).map_err(|e| e.to_string())?.into_iter().map(|x| x.id).collect();
        if got != expected {
            return fail("development");
        }
        n += 1;
    }
    for dep in DeploymentType::ALL {
        let expected = t.deployment.get(canonical).and_then(|m| m.get(&dep)).map(|v| entries(v)).unwrap_or_default();
        if query_deployment(ix, asked, dep, None).map_err(|e| e.to_string())? != expected {
            return fail("deployment");
        }
        n += 1;
    }
    Ok(n)
}

fn query_correctness(s: &Seeded, ix: &SpecIndex) -> Result<String, String> {
    let mut checks = 0;
    for canonical in s.truth.proc_req.keys() {
        checks += check_queries(ix, &s.truth, canonical, canonical)?;
    }
    let mut aliases = 0;
    for (canonical, names) in s.lex.entries() {
        for alias in names {
            checks += check_queries(ix, &s.truth, alias, canonical)?;
            aliases += 1;
        }
    }
    Ok(format!("{checks} query answers match, {aliases}/{aliases} lexicon names equal their canonical query"))
}

fn diff_identity_and_symmetry(s: &Seeded, ix: &SpecIndex) -> Result<String, String> {
    let procs: Vec<&String> = s.truth.proc_req.keys().collect();
    for p in &procs {
        for &r in &ix.release_universe {
            if !query_release_diff(ix, p, r, r).map_err(|e| e.to_string())?.is_empty() {
                return Err(format!("diff of `{p}` at {r} against itself is not empty"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut non_empty = 0;
    for _ in 0..SYMMETRY_SAMPLES {
        let p = procs.choose(&mut rng).unwrap();
        let a = *ix.release_universe.choose(&mut rng).unwrap();
        let b = *ix.release_universe.choose(&mut rng).unwrap();
        let ab = query_release_diff(ix, p, a, b).map_err(|e| e.to_string())?;
        let ba = query_release_diff(ix, p, b, a).map_err(|e| e.to_string())?;
        let pick = |ds: &[reqspec::resolver::BehaviorDiff], k| -> Vec<(String, Vec<String>)> {
            ds.iter().map(|d| (d.id.clone(), d.texts(k).into_iter().map(str::to_string).collect())).collect()
        };
        if pick(&ab, SegmentKind::Added) != pick(&ba, SegmentKind::Removed) || pick(&ab, SegmentKind::Removed) != pick(&ba, SegmentKind::Added) {
            return Err(format!("diff of `{p}` between {a} and {b} is not symmetric"));
        }
        non_empty += usize::from(!ab.is_empty());
    }
    Ok(format!("identity on {} procedures, symmetry on {SYMMETRY_SAMPLES} samples ({non_empty} non-empty)", procs.len()))
}

fn dataset_properties(s: &Seeded) -> Result<String, String> {
    let naive = naive_dump_bytes(&s.docs);
    let all = extract_all(&s.docs, &s.reg, &DatasetConfig::default()).map_err(|e| e.to_string())?;
    let largest = all.iter().map(|d| d.to_jsonl().len()).max().unwrap_or(0);
    if largest > naive {
        return Err(format!("largest dataset {largest} bytes exceeds naive dump {naive} bytes"));
    }
    let base = std::env::temp_dir().join(format!("reqspec-acceptance-{}", std::process::id()));
    let (one, two) = (base.join("one"), base.join("two"));
    write_datasets(&one, &all, &s.docs).map_err(|e| e.to_string())?;
    let again = extract_all(&s.docs, &s.reg, &DatasetConfig::default()).map_err(|e| e.to_string())?;
    write_datasets(&two, &again, &s.docs).map_err(|e| e.to_string())?;
    for ds in &all {
        let name = format!("{}.jsonl", ds.release);
        if std::fs::read(one.join(&name)).ok() != std::fs::read(two.join(&name)).ok() {
            return Err(format!("{name} differs between runs"));
        }
    }
    let stats_equal = std::fs::read(one.join("stats.json")).ok() == std::fs::read(two.join("stats.json")).ok();
    let _ = std::fs::remove_dir_all(&base);
    if !stats_equal {
        return Err("stats.json differs between runs".into());
    }
    Ok(format!("{} datasets, largest {largest} B <= naive {naive} B, re-extraction byte-identical", all.len()))
}

fn digits(s: &str) -> Vec<char> {
    let mut d: Vec<char> = s.chars().filter(char::is_ascii_digit).collect();
    d.sort_unstable();
    d
}

fn tokenizer_contract() -> Result<String, String> {
    let cases = [
        ("activateMeasurementSA", TokenKind::Identifier),
        ("CB00XXXX", TokenKind::DevelopmentId),
        ("01R1", TokenKind::ReleaseId),
        ("[Before CB00XXXX]", TokenKind::Tag),
    ];
    for (text, kind) in cases {
        let t = tokenize(text);
        if t.len() != 1 || t[0].kind != kind || t[0].text != text {
            return Err(format!("`{text}` tokenizes to {t:?}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pieces = [
        "activateMeasurementSA", "CB00XXXX", "01R1", "[Before CB00XXXX]", "3.5", "dB", "T310", "maxA2Offset", "x.2", "REQ_A2_0001",
        "a", "-", "(", ")", ".", ",", " ", " ", "\n", "42", "0.", "1e5", "[SA]", "[End 7]", "é9",
    ];
    let mut fuzz = String::new();
    while fuzz.chars().count() < FUZZ_CHARS {
        if rng.gen_bool(0.2) {
            fuzz.push(char::from_u32(rng.gen_range(0x20..0x250)).unwrap_or('?'));
        } else {
            fuzz.push_str(pieces.choose(&mut rng).unwrap());
        }
    }
    let joined: String = tokenize(&fuzz).iter().map(|t| t.text.as_str()).collect();
    if digits(&joined) != digits(&fuzz) {
        return Err("digit multiset changed on the fuzz corpus".into());
    }
    Ok(format!("4 single-token cases, digit multiset preserved over {} fuzz chars", fuzz.chars().count()))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let s = seeded();
    let ix = build_index(&s.docs, &s.reg, &s.lex).expect("seeded corpus indexes");
    let results: Vec<(&str, Result<String, String>)> = vec![
        ("1 baselining equivalence", baselining_equivalence()),
        ("2 parser round trip", round_trip()),
        ("3 resolution purity", purity(&s)),
        ("4 lint ground truth", lint_ground_truth(&s)),
        ("5 query correctness", query_correctness(&s, &ix)),
        ("6 diff identity and symmetry", diff_identity_and_symmetry(&s, &ix)),
        ("7 dataset size and idempotence", dataset_properties(&s)),
        ("8 tokenizer contract", tokenizer_contract()),
    ];
    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    println!("{} of {} criteria passed in {secs:.1}s", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
