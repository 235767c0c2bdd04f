//! L1: near-duplicate requirements by k-token shingle Jaccard similarity.
//!
//! Each requirement is compared through its text resolved at the latest
//! release where it is valid. Candidate pairs come from an inverted shingle
//! index, so only pairs sharing at least one shingle are scored; since the
//! threshold is positive this loses no pair.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use crate::exec::Execution;
use crate::model::{DeploymentScope, DevelopmentRegistry, ReleaseId, SpecDocument};
use crate::resolver::{materialize, release_universe};
use crate::tokenizer::{normalize, tokenize, TokenKind};

use super::{LintConfig, LintFinding, Location, Rule};

/// Hashed k-token shingles of a normalized token sequence, sorted and
/// de-duplicated. Sequences shorter than `k` form a single shingle.
pub fn shingles(tokens: &[String], k: usize) -> Vec<u64> {
    let hash = |window: &[String]| {
        let mut h = DefaultHasher::new();
        window.hash(&mut h);
        h.finish()
    };
    let mut out: Vec<u64> = if tokens.is_empty() {
        Vec::new()
    } else if tokens.len() < k {
        vec![hash(tokens)]
    } else {
        tokens.windows(k).map(hash).collect()
    };
    out.sort_unstable();
    out.dedup();
    out
}

/// Jaccard similarity of two sorted, de-duplicated sets.
pub fn jaccard(a: &[u64], b: &[u64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    shared as f64 / (a.len() + b.len() - shared) as f64
}

struct Entry {
    location: Location,
    shingles: Vec<u64>,
    identifiers: BTreeSet<String>,
}

fn latest_valid(req: &crate::model::Requirement, universe: &[ReleaseId]) -> Option<ReleaseId> {
    universe.iter().rev().find(|r| req.version_at(**r).is_some()).copied()
}

fn build_entries(docs: &[SpecDocument], reg: &DevelopmentRegistry, k: usize, exec: Execution) -> Vec<Entry> {
    let universe = release_universe(docs, reg);
    let reqs: Vec<(&str, &crate::model::Requirement)> =
        docs.iter().flat_map(|d| d.requirements().into_iter().map(move |r| (d.name.as_str(), r))).collect();
    exec.map(&reqs, |(doc, req)| {
        let release = latest_valid(req, &universe)?;
        let resolved = materialize(req, release, DeploymentScope::Both, reg).ok()??;
        let tokens = normalize(&tokenize(&resolved.text));
        let identifiers = tokens.iter().filter(|t| t.kind == TokenKind::Identifier).map(|t| t.text.clone()).collect();
        let keys: Vec<String> = tokens.into_iter().map(|t| t.text).collect();
        let version = req.version_at(release).map(|v| v.first_release);
        Some(Entry { location: Location::new(doc, &req.id, version), shingles: shingles(&keys, k), identifiers })
    })
    .into_iter()
    .flatten()
    .collect()
}

/// True when the two identifier sets differ and every identifier missing
/// from one side is a prefix-extension of one on the other side, as in
/// `activateMeasurement` vs `activateMeasurementSA`.
fn renamed_parameters(a: &BTreeSet<String>, b: &BTreeSet<String>) -> Option<(String, String)> {
    let only_a: Vec<&String> = a.difference(b).collect();
    let only_b: Vec<&String> = b.difference(a).collect();
    if only_a.is_empty() && only_b.is_empty() {
        return None;
    }
    let related = |x: &String, y: &String| x.starts_with(y.as_str()) || y.starts_with(x.as_str());
    let covers = |from: &[&String], to: &[&String]| from.iter().all(|x| to.iter().any(|y| related(x, y)));
    if covers(&only_a, &only_b) && covers(&only_b, &only_a) {
        Some((only_a[0].clone(), only_b[0].clone()))
    } else {
        None
    }
}

pub fn detect_duplication(docs: &[SpecDocument], reg: &DevelopmentRegistry, config: &LintConfig) -> Vec<LintFinding> {
    detect_duplication_with(docs, reg, config, Execution::default())
}

/// Reports each unordered pair of requirements whose shingle Jaccard
/// similarity reaches `config.dup_threshold`, exactly once.
pub fn detect_duplication_with(
    docs: &[SpecDocument],
    reg: &DevelopmentRegistry,
    config: &LintConfig,
    exec: Execution,
) -> Vec<LintFinding> {
    let entries = build_entries(docs, reg, config.shingle_k, exec);
    let mut postings: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, e) in entries.iter().enumerate() {
        for &s in &e.shingles {
            postings.entry(s).or_default().push(i);
        }
    }
    let per_entry = exec.map_range(entries.len(), |i| {
        let mut shared: HashMap<usize, usize> = HashMap::new();
        for s in &entries[i].shingles {
            for &j in &postings[s] {
                if j > i {
                    *shared.entry(j).or_default() += 1;
                }
            }
        }
        let mut hits: Vec<(usize, f64)> = shared
            .into_iter()
            .map(|(j, n)| (j, n as f64 / (entries[i].shingles.len() + entries[j].shingles.len() - n) as f64))
            .filter(|&(_, sim)| sim >= config.dup_threshold)
            .collect();
        hits.sort_by_key(|&(j, _)| j);
        hits.into_iter()
            .map(|(j, sim)| {
                let (a, b) = (&entries[i], &entries[j]);
                let finding = match renamed_parameters(&a.identifiers, &b.identifiers) {
                    Some((x, y)) => LintFinding::new(
                        Rule::Duplication,
                        "renamed-parameter",
                        a.location.clone(),
                        format!("near-copy of {} with parameter `{x}` renamed to `{y}`", b.location.requirement),
                    ),
                    None => LintFinding::new(
                        Rule::Duplication,
                        "near-duplicate",
                        a.location.clone(),
                        format!("content duplicates {}", b.location.requirement),
                    ),
                };
                finding.with_score(sim).with_related(b.location.clone())
            })
            .collect::<Vec<_>>()
    });
    per_entry.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_document;
    use std::collections::HashSet;

    fn corpus(reqs: &[(&str, &str)]) -> Vec<SpecDocument> {
        let mut src = String::from("%name doc\n# S\n");
        for (id, text) in reqs {
            src.push_str(&format!("=== REQ {id} ===\n--- VERSION first=01R1 last=open ---\n{text}\n=== END ===\n"));
        }
        vec![parse_document(&src).unwrap()]
    }

    /// Oracle: Jaccard over explicit string shingle sets.
    fn brute_jaccard(a: &str, b: &str, k: usize) -> f64 {
        let set = |t: &str| -> HashSet<Vec<String>> {
            let toks: Vec<String> = normalize(&tokenize(t)).into_iter().map(|t| t.text).collect();
            if toks.len() < k {
                return [toks].into_iter().filter(|v| !v.is_empty()).collect();
            }
            toks.windows(k).map(|w| w.to_vec()).collect()
        };
        let (sa, sb) = (set(a), set(b));
        sa.intersection(&sb).count() as f64 / sa.union(&sb).count() as f64
    }

    fn words(seed: usize, n: usize) -> String {
        (0..n).map(|i| format!("w{}x", (seed * 7919 + i * 104729) % 100_003)).collect::<Vec<_>>().join(" ") + "."
    }

    #[test]
    fn identical_texts_score_one() {
        let text = words(1, 40);
        let docs = corpus(&[("REQ_A1", &text), ("REQ_A2", &text)]);
        let f = detect_duplication(&docs, &DevelopmentRegistry::new(), &LintConfig::default());
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].score, Some(1.0));
        assert_eq!(f[0].check, "near-duplicate");
        assert_eq!(f[0].location.requirement, "REQ_A1");
        assert_eq!(f[0].related.as_ref().unwrap().requirement, "REQ_A2");
    }

    #[test]
    fn renamed_parameter_pair() {
        let base: Vec<String> = (0..60).map(|i| format!("filler{}", ["a", "b", "c", "d", "e", "f", "g"][i % 7].repeat(i / 7 + 1))).collect();
        let mut a = base.clone();
        a[30] = "activateMeasurement".into();
        let mut b = base;
        b[30] = "activateMeasurementSA".into();
        let (ta, tb) = (a.join(" ") + ".", b.join(" ") + ".");
        let expected = brute_jaccard(&ta, &tb, 5);
        assert!(expected >= 0.7);
        let docs = corpus(&[("REQ_P1", &ta), ("REQ_P2", &tb)]);
        let f = detect_duplication(&docs, &DevelopmentRegistry::new(), &LintConfig::default());
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].check, "renamed-parameter");
        assert!((f[0].score.unwrap() - expected).abs() < 1e-12);
        assert!(f[0].message.contains("activateMeasurement"));
    }

    #[test]
    fn unrelated_requirements_do_not_pair() {
        let (a, b) = (words(3, 60), words(11, 60));
        assert!(brute_jaccard(&a, &b, 5) < 0.7);
        let docs = corpus(&[("REQ_U1", &a), ("REQ_U2", &b)]);
        assert!(detect_duplication(&docs, &DevelopmentRegistry::new(), &LintConfig::default()).is_empty());
    }

    #[test]
    fn hashed_jaccard_matches_oracle() {
        let texts = [words(1, 30), words(1, 25), format!("{} tail words here now", words(1, 28)), words(2, 3), words(2, 3)];
        for a in &texts {
            for b in &texts {
                let sa = shingles(&normalize(&tokenize(a)).into_iter().map(|t| t.text).collect::<Vec<_>>(), 5);
                let sb = shingles(&normalize(&tokenize(b)).into_iter().map(|t| t.text).collect::<Vec<_>>(), 5);
                assert!((jaccard(&sa, &sb) - brute_jaccard(a, b, 5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_copy_adds_one_finding() {
        let base: Vec<(String, String)> = (0..6).map(|i| (format!("REQ_B{i}"), words(i + 20, 50))).collect();
        let refs: Vec<(&str, &str)> = base.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let before = detect_duplication(&corpus(&refs), &DevelopmentRegistry::new(), &LintConfig::default());
        let mut with_copy = refs.clone();
        with_copy.push(("REQ_COPY", refs[2].1));
        let after = detect_duplication(&corpus(&with_copy), &DevelopmentRegistry::new(), &LintConfig::default());
        assert_eq!(after.len(), before.len() + 1);
        let new = after.iter().find(|f| f.related.as_ref().unwrap().requirement == "REQ_COPY").unwrap();
        assert_eq!(new.score, Some(1.0));
    }

    #[test]
    fn execution_modes_agree() {
        let reqs: Vec<(String, String)> = (0..30).map(|i| (format!("REQ_E{i}"), words(i % 10, 40))).collect();
        let refs: Vec<(&str, &str)> = reqs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let docs = corpus(&refs);
        let cfg = LintConfig::default();
        let reg = DevelopmentRegistry::new();
        assert_eq!(
            detect_duplication_with(&docs, &reg, &cfg, Execution::Parallel),
            detect_duplication_with(&docs, &reg, &cfg, Execution::Sequential)
        );
    }
}
