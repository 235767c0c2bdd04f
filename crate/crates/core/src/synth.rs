//! Deterministic synthetic corpora with known defects.
//!
//! The generator first builds a plan (requirements as flat lists of text,
//! DevBlock and span parts) and renders it to `.spec` sources. Ground truth
//! is computed from the plan itself, never by parsing or resolving the
//! rendered text, so it can be used to check the parser, resolver, linter and
//! index against something independent.
//!
//! Randomness comes from ChaCha8 seeded with a `u64`; equal seeds give
//! byte-identical output on every platform.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::UNMAPPED;
use crate::model::{
    canonicalize, ContentSegment, DeploymentScope, DeploymentType, DevelopmentId, DevelopmentRegistry, LastRelease,
    ReleaseId, Requirement, RequirementVersion, Section, SpecDocument,
};

/// Procedure names and two aliases each.
const PROCEDURES: [(&str, [&str; 2]); 12] = [
    ("A2 measurement", ["A2 measurement for Handover", "A2 event measurement"]),
    ("cell reselection", ["reselection of cells", "idle mode reselection"]),
    ("RRC connection setup", ["RRC setup", "connection establishment"]),
    ("paging procedure", ["paging handling", "UE paging"]),
    ("beam failure recovery", ["BFR", "beam recovery"]),
    ("carrier aggregation", ["CA", "carrier combination"]),
    ("random access", ["RACH procedure", "random access procedure"]),
    ("measurement gap", ["gap pattern", "measurement gap pattern"]),
    ("bearer release", ["bearer teardown", "radio bearer release"]),
    ("PDU session setup", ["PDU session establishment", "session setup"]),
    ("conditional handover", ["CHO", "conditional HO"]),
    ("DRX configuration", ["DRX setup", "discontinuous reception configuration"]),
];

const SYLLABLES: [&str; 24] = [
    "lor", "van", "tes", "kim", "dra", "nol", "pue", "sar", "bit", "mek", "zon", "fal", "gri", "hup", "jas", "wel", "oki",
    "tam", "rud", "vex", "lin", "por", "ceb", "dun",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    /// Total requirement count, headers and injected copies included.
    pub requirements: usize,
    pub documents: usize,
    pub sections: usize,
    /// Number of lexicon procedures used, at most 12.
    pub procedures: usize,
    /// Releases `01R1..01R<n>`.
    pub releases: usize,
    pub developments: usize,
    pub near_duplicates: usize,
    pub over_length: usize,
    pub alias_usages: usize,
    pub dispersed: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            requirements: 200,
            documents: 4,
            sections: 12,
            procedures: 12,
            releases: 4,
            developments: 6,
            near_duplicates: 10,
            over_length: 8,
            alias_usages: 12,
            dispersed: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("invalid generator settings: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicatePair {
    pub base: String,
    pub copy: String,
    /// The copy renames one parameter instead of changing a word.
    pub renamed_parameter: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliasUsage {
    pub requirement: String,
    pub surface: String,
    pub canonical: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleasePair {
    pub from: ReleaseId,
    pub to: ReleaseId,
    /// Requirements whose resolved text differs between the two releases.
    pub changed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub requirements: usize,
    pub releases: Vec<ReleaseId>,
    pub developments: BTreeMap<DevelopmentId, ReleaseId>,
    pub headers: Vec<String>,
    pub near_duplicates: Vec<DuplicatePair>,
    pub over_length: Vec<String>,
    pub alias_usages: Vec<AliasUsage>,
    pub dispersed: Vec<String>,
    pub proc_req: BTreeMap<String, BTreeSet<String>>,
    pub behavior: BTreeMap<String, BTreeMap<ReleaseId, Vec<TruthEntry>>>,
    /// Texts per deployment at the latest release.
    pub deployment: BTreeMap<String, BTreeMap<DeploymentType, Vec<TruthEntry>>>,
    /// Requirement ids changed by each development, per procedure.
    pub dev_changes: BTreeMap<String, BTreeMap<DevelopmentId, Vec<String>>>,
    pub release_diffs: BTreeMap<String, Vec<ReleasePair>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthDocument {
    pub name: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthCorpus {
    pub documents: Vec<SynthDocument>,
    pub registry: String,
    pub lexicon: String,
    pub truth: GroundTruth,
}

impl SynthCorpus {
    /// Writes `<dir>/docs/<name>.spec`, `registry.txt`, `lexicon.json` and
    /// `ground_truth.json`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        let docs = dir.join("docs");
        fs::create_dir_all(&docs)?;
        for d in &self.documents {
            fs::write(docs.join(format!("{}.spec", d.name)), &d.source)?;
        }
        fs::write(dir.join("registry.txt"), &self.registry)?;
        fs::write(dir.join("lexicon.json"), &self.lexicon)?;
        let truth = serde_json::to_string_pretty(&self.truth).expect("ground truth serializes");
        fs::write(dir.join("ground_truth.json"), truth + "\n")
    }
}

#[derive(Debug, Clone)]
enum Part {
    Text(String),
    Dev { dev: usize, before: String, after: String },
    Span { dep: DeploymentType, text: String },
}

#[derive(Debug, Clone)]
struct PlanVersion {
    first: usize,
    last: Option<usize>,
    parts: Vec<Part>,
}

#[derive(Debug, Clone)]
struct PlanReq {
    id: String,
    section: usize,
    procedure: Option<usize>,
    versions: Vec<PlanVersion>,
}

struct Vocab {
    words: Vec<String>,
}

impl Vocab {
    fn new(rng: &mut ChaCha8Rng, size: usize) -> Self {
        let mut reserved: HashSet<String> = ["the", "shall", "overview", "using", "and"].iter().map(|s| s.to_string()).collect();
        for (c, aliases) in PROCEDURES {
            for phrase in std::iter::once(c).chain(aliases) {
                reserved.extend(phrase.split_whitespace().map(str::to_lowercase));
            }
        }
        let mut seen = HashSet::new();
        let mut words = Vec::with_capacity(size);
        while words.len() < size {
            let n = rng.gen_range(2..=3);
            let w: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
            if !reserved.contains(&w) && seen.insert(w.clone()) {
                words.push(w);
            }
        }
        Self { words }
    }

    fn word(&self, rng: &mut ChaCha8Rng) -> String {
        self.words.choose(rng).unwrap().clone()
    }

    fn words(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
        (0..n).map(|_| self.word(rng)).collect()
    }

    /// A capitalized sentence of `n` words ending in a period.
    fn sentence(&self, rng: &mut ChaCha8Rng, n: usize) -> String {
        let mut w = self.words(rng, n);
        w[0] = capitalize(&w[0]);
        w.join(" ") + "."
    }

    fn identifier(&self, rng: &mut ChaCha8Rng) -> String {
        format!("set{}{}", capitalize(&self.word(rng)), capitalize(&self.word(rng)))
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn release(i: usize) -> ReleaseId {
    ReleaseId::new(1, i as u32 + 1).expect("revision is positive")
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    vocab: Vocab,
    devs: Vec<(DevelopmentId, usize)>,
    next_id: usize,
}

impl Generator<'_> {
    fn fresh_id(&mut self, procedure: usize) -> String {
        self.next_id += 1;
        format!("REQ_P{:02}_{:04}", procedure + 1, self.next_id)
    }

    fn mention_sentence(&mut self, surface: &str, extra: usize) -> String {
        let n = self.rng.gen_range(4..9) + extra;
        let mut words = vec!["The".to_string(), surface.to_string(), "shall".to_string()];
        words.extend(self.vocab.words(&mut self.rng, n));
        if self.rng.gen_bool(0.2) {
            words.push("using".into());
            words.push(self.vocab.identifier(&mut self.rng));
        }
        words.join(" ") + "."
    }

    fn dev_part(&mut self, candidates: &[usize]) -> Part {
        let dev = *candidates.choose(&mut self.rng).unwrap();
        let n = self.rng.gen_range(3..8);
        let before = self.vocab.sentence(&mut self.rng, n);
        let mut after = self.vocab.sentence(&mut self.rng, n + 1);
        while after == before {
            after = self.vocab.sentence(&mut self.rng, n + 1);
        }
        Part::Dev { dev, before, after }
    }

    /// Mention sentence, 0-2 DevBlocks, at most one deployment span and an
    /// optional closing sentence.
    fn regular_parts(&mut self, surface: &str) -> Vec<Part> {
        let mut parts = vec![Part::Text(self.mention_sentence(surface, 0))];
        let mut pool: Vec<usize> = (0..self.devs.len()).collect();
        pool.shuffle(&mut self.rng);
        let blocks = self.rng.gen_range(0..=2).min(pool.len());
        for &d in &pool[..blocks] {
            parts.push(self.dev_part(&[d]));
        }
        if self.rng.gen_bool(0.35) {
            let dep = *DeploymentType::ALL.choose(&mut self.rng).unwrap();
            let n = self.rng.gen_range(3..7);
            let text = self.vocab.sentence(&mut self.rng, n);
            let at = self.rng.gen_range(1..=parts.len());
            parts.insert(at, Part::Span { dep, text });
        }
        if self.rng.gen_bool(0.5) {
            let n = self.rng.gen_range(4..10);
            parts.push(Part::Text(self.vocab.sentence(&mut self.rng, n)));
        }
        parts
    }

    fn regular_versions(&mut self, surface: &str) -> Vec<PlanVersion> {
        let last = self.cfg.releases - 1;
        let roll: f64 = self.rng.gen();
        if roll < 0.15 && !self.devs.is_empty() {
            // baselined: the older version still carries the DevBlock
            let d = self.rng.gen_range(0..self.devs.len());
            let k = self.devs[d].1;
            let mut parts = vec![Part::Text(self.mention_sentence(surface, 0))];
            parts.push(self.dev_part(&[d]));
            let n = self.rng.gen_range(4..9);
            parts.push(Part::Text(self.vocab.sentence(&mut self.rng, n)));
            let inlined = parts
                .iter()
                .map(|p| match p {
                    Part::Dev { after, .. } => Part::Text(after.clone()),
                    other => other.clone(),
                })
                .collect();
            vec![PlanVersion { first: 0, last: Some(k - 1), parts }, PlanVersion { first: k, last: None, parts: inlined }]
        } else if roll < 0.27 {
            vec![PlanVersion { first: 1, last: None, parts: self.regular_parts(surface) }]
        } else if roll < 0.37 {
            vec![PlanVersion { first: 0, last: Some(last - 1), parts: self.regular_parts(surface) }]
        } else {
            vec![PlanVersion { first: 0, last: None, parts: self.regular_parts(surface) }]
        }
    }
}

fn single(parts: Vec<Part>) -> Vec<PlanVersion> {
    vec![PlanVersion { first: 0, last: None, parts }]
}

impl SynthConfig {
    fn check(&self) -> Result<(), SynthError> {
        let err = |m: &str| Err(SynthError::Config(m.to_string()));
        if self.procedures == 0 || self.procedures > PROCEDURES.len() {
            return err("procedures must be between 1 and 12");
        }
        if self.documents == 0 || self.sections < self.documents {
            return err("need at least one document and one section per document");
        }
        if self.releases < 2 || self.releases > 99 {
            return err("releases must be between 2 and 99");
        }
        if self.dispersed > self.procedures {
            return err("more dispersed procedures than procedures");
        }
        if self.dispersed > 0 && self.sections < 4 {
            return err("dispersed procedures need at least 4 sections");
        }
        let regular = self.requirements.checked_sub(self.sections + self.near_duplicates);
        match regular {
            Some(r) if r >= self.near_duplicates + self.over_length + self.alias_usages && r >= self.procedures * 4 => Ok(()),
            _ => err("too few requirements for the requested sections, procedures and defects"),
        }
    }
}

/// Builds a synthetic corpus with the injected defects listed in its ground truth.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Vocab::new(&mut rng, 800);

    let mut devs = Vec::new();
    let mut dev_names = HashSet::new();
    while devs.len() < cfg.developments {
        let suffix: String = (0..6).map(|_| *b"ABCDEFGHJKLMNPQRSTUVWXYZ0123456789".choose(&mut rng).unwrap() as char).collect();
        if dev_names.insert(suffix.clone()) {
            let intro = 1 + devs.len() % (cfg.releases - 1);
            devs.push((format!("CB{suffix}").parse::<DevelopmentId>().expect("valid id"), intro));
        }
    }
    let mut g = Generator { cfg, rng, vocab, devs, next_id: 0 };

    // sections: titles, owning document
    let mut titles = Vec::new();
    let mut seen_titles = HashSet::new();
    while titles.len() < cfg.sections {
        let t = format!("{} {}", capitalize(&g.vocab.word(&mut g.rng)), capitalize(&g.vocab.word(&mut g.rng)));
        if seen_titles.insert(t.clone()) {
            titles.push(t);
        }
    }
    let doc_of = |s: usize| s * cfg.documents / cfg.sections;

    // procedures: home section, dispersed ones spread over four
    let mut order: Vec<usize> = (0..cfg.procedures).collect();
    order.shuffle(&mut g.rng);
    let dispersed: BTreeSet<usize> = order[..cfg.dispersed].iter().copied().collect();
    let proc_sections: Vec<Vec<usize>> = (0..cfg.procedures)
        .map(|p| {
            let home = p % cfg.sections;
            if dispersed.contains(&p) {
                let mut others: Vec<usize> = (0..cfg.sections).filter(|&s| s != home).collect();
                others.shuffle(&mut g.rng);
                std::iter::once(home).chain(others.into_iter().take(3)).collect()
            } else {
                vec![home]
            }
        })
        .collect();

    let regular = cfg.requirements - cfg.sections - cfg.near_duplicates;
    let mut roles: Vec<usize> = (0..regular).collect();
    roles.shuffle(&mut g.rng);
    let dup_bases: BTreeSet<usize> = roles[..cfg.near_duplicates].iter().copied().collect();
    let over: BTreeSet<usize> = roles[cfg.near_duplicates..cfg.near_duplicates + cfg.over_length].iter().copied().collect();
    let alias_start = cfg.near_duplicates + cfg.over_length;
    let alias: BTreeSet<usize> = roles[alias_start..alias_start + cfg.alias_usages].iter().copied().collect();

    let mut reqs: Vec<PlanReq> = Vec::new();
    for (s, title) in titles.iter().enumerate().take(cfg.sections) {
        let text = format!("{title} overview.");
        reqs.push(PlanReq { id: format!("REQ_HDR_{:02}", s + 1), section: s, procedure: None, versions: single(vec![Part::Text(text)]) });
    }

    let mut truth_dups = Vec::new();
    let mut truth_over = Vec::new();
    let mut truth_alias = Vec::new();
    let mut copies = Vec::new();
    let mut per_proc = vec![0usize; cfg.procedures];
    for i in 0..regular {
        let p = i % cfg.procedures;
        let section = proc_sections[p][per_proc[p] % proc_sections[p].len()];
        per_proc[p] += 1;
        let canonical = PROCEDURES[p].0;
        let id = g.fresh_id(p);
        let versions = if dup_bases.contains(&i) {
            // one long sentence with a parameter, copied below with one change
            let mut words = vec!["The".to_string(), canonical.to_string(), "shall".to_string()];
            words.extend(g.vocab.words(&mut g.rng, 62));
            let param_at = g.rng.gen_range(10..50);
            words[param_at] = g.vocab.identifier(&mut g.rng);
            let renamed = copies.len() % 3 == 0;
            let mut copy = words.clone();
            if renamed {
                copy[param_at] = format!("{}SA", words[param_at]);
            } else {
                let mut at = g.rng.gen_range(3..words.len());
                while at == param_at {
                    at = g.rng.gen_range(3..words.len());
                }
                let mut fresh = g.vocab.word(&mut g.rng);
                while words.contains(&fresh) {
                    fresh = g.vocab.word(&mut g.rng);
                }
                copy[at] = fresh;
            }
            copies.push((p, section, id.clone(), copy.join(" ") + ".", renamed));
            single(vec![Part::Text(words.join(" ") + ".")])
        } else if over.contains(&i) {
            truth_over.push(id.clone());
            let mut parts = vec![Part::Text(g.mention_sentence(canonical, 0))];
            let mut total = 0;
            while total < 270 {
                let n = g.rng.gen_range(10..20);
                total += n;
                parts.push(Part::Text(g.vocab.sentence(&mut g.rng, n)));
            }
            single(parts)
        } else if alias.contains(&i) {
            let surface = *PROCEDURES[p].1.choose(&mut g.rng).unwrap();
            truth_alias.push(AliasUsage { requirement: id.clone(), surface: surface.to_string(), canonical: canonical.to_string() });
            single(g.regular_parts(surface))
        } else {
            g.regular_versions(canonical)
        };
        reqs.push(PlanReq { id, section, procedure: Some(p), versions });
    }
    for (p, section, base, text, renamed) in copies {
        let id = g.fresh_id(p);
        truth_dups.push(DuplicatePair { base, copy: id.clone(), renamed_parameter: renamed });
        reqs.push(PlanReq { id, section, procedure: Some(p), versions: single(vec![Part::Text(text)]) });
    }

    // rendering order: document, section, creation order
    let mut ordered: Vec<&PlanReq> = reqs.iter().collect();
    ordered.sort_by_key(|r| (doc_of(r.section), r.section));

    let mut documents = Vec::new();
    for d in 0..cfg.documents {
        let name = format!("spec{:02}", d + 1);
        let mut src = format!("%spec 1\n%name {name}\n\n");
        for s in (0..cfg.sections).filter(|&s| doc_of(s) == d) {
            src.push_str(&format!("# {}\n\n", titles[s]));
            for r in ordered.iter().filter(|r| r.section == s) {
                render_requirement(&mut src, r, &g.devs);
            }
        }
        documents.push(SynthDocument { name, source: src });
    }

    let mut registry = String::from("# development registry\n");
    for (d, r) in &g.devs {
        registry.push_str(&format!("{d} {}\n", release(*r)));
    }
    for r in 0..cfg.releases {
        registry.push_str(&format!("{}\n", release(r)));
    }

    let lexicon: BTreeMap<&str, Vec<&str>> = PROCEDURES[..cfg.procedures].iter().map(|(c, a)| (*c, a.to_vec())).collect();
    let lexicon = serde_json::to_string_pretty(&lexicon).expect("lexicon serializes") + "\n";

    let truth = GroundTruth {
        seed: cfg.seed,
        requirements: reqs.len(),
        releases: (0..cfg.releases).map(release).collect(),
        developments: g.devs.iter().map(|(d, r)| (d.clone(), release(*r))).collect(),
        headers: (0..cfg.sections).map(|s| format!("REQ_HDR_{:02}", s + 1)).collect(),
        near_duplicates: truth_dups,
        over_length: truth_over,
        alias_usages: truth_alias,
        dispersed: dispersed.iter().map(|&p| PROCEDURES[p].0.to_string()).collect(),
        ..query_truth(&ordered, &g.devs, cfg.releases)
    };
    Ok(SynthCorpus { documents, registry, lexicon, truth })
}

fn render_requirement(out: &mut String, r: &PlanReq, devs: &[(DevelopmentId, usize)]) {
    out.push_str(&format!("=== REQ {} ===\n", r.id));
    for v in &r.versions {
        let last = v.last.map_or("open".to_string(), |l| release(l).to_string());
        out.push_str(&format!("--- VERSION first={} last={last} ---\n", release(v.first)));
        let body: Vec<String> = v
            .parts
            .iter()
            .map(|p| match p {
                Part::Text(t) => t.clone(),
                Part::Dev { dev, before, after } => {
                    let d = &devs[*dev].0;
                    format!("[Before {d}] {before} [{d}] {after} [End {d}]")
                }
                Part::Span { dep, text } => format!("[{}] {text} [End {}]", dep.as_str(), dep.as_str()),
            })
            .collect();
        out.push_str(&body.join(" "));
        out.push('\n');
    }
    out.push_str("=== END ===\n\n");
}

fn version_at(r: &PlanReq, rel: usize) -> Option<&PlanVersion> {
    r.versions.iter().find(|v| v.first <= rel && v.last.is_none_or(|l| rel <= l))
}

/// Expected resolved text, straight from the plan.
fn expected(r: &PlanReq, rel: usize, scope: DeploymentScope, devs: &[(DevelopmentId, usize)]) -> Option<String> {
    let v = version_at(r, rel)?;
    let pieces: Vec<&str> = v
        .parts
        .iter()
        .filter_map(|p| match p {
            Part::Text(t) => Some(t.as_str()),
            Part::Dev { dev, before, after } => Some(if devs[*dev].1 <= rel { after } else { before }.as_str()),
            Part::Span { dep, text } => scope.includes(*dep).then_some(text.as_str()),
        })
        .collect();
    Some(pieces.join(" "))
}

fn plan_devs(v: Option<&PlanVersion>) -> impl Iterator<Item = usize> + '_ {
    v.into_iter().flat_map(|v| v.parts.iter()).filter_map(|p| match p {
        Part::Dev { dev, .. } => Some(*dev),
        _ => None,
    })
}

fn query_truth(ordered: &[&PlanReq], devs: &[(DevelopmentId, usize)], releases: usize) -> GroundTruth {
    let name = |r: &PlanReq| r.procedure.map_or(UNMAPPED.to_string(), |p| PROCEDURES[p].0.to_string());
    let mut t = GroundTruth {
        seed: 0,
        requirements: 0,
        releases: Vec::new(),
        developments: BTreeMap::new(),
        headers: Vec::new(),
        near_duplicates: Vec::new(),
        over_length: Vec::new(),
        alias_usages: Vec::new(),
        dispersed: Vec::new(),
        proc_req: BTreeMap::new(),
        behavior: BTreeMap::new(),
        deployment: BTreeMap::new(),
        dev_changes: BTreeMap::new(),
        release_diffs: BTreeMap::new(),
    };
    let latest = releases - 1;
    for r in ordered {
        let p = name(r);
        t.proc_req.entry(p.clone()).or_default().insert(r.id.clone());
        for rel in 0..releases {
            if let Some(text) = expected(r, rel, DeploymentScope::Both, devs) {
                t.behavior.entry(p.clone()).or_default().entry(release(rel)).or_default().push(TruthEntry { id: r.id.clone(), text });
            }
        }
        for dep in DeploymentType::ALL {
            if let Some(text) = expected(r, latest, DeploymentScope::Only(dep), devs) {
                t.deployment.entry(p.clone()).or_default().entry(dep).or_default().push(TruthEntry { id: r.id.clone(), text });
            }
        }
        for rel in 1..releases {
            if expected(r, rel - 1, DeploymentScope::Both, devs) == expected(r, rel, DeploymentScope::Both, devs) {
                continue;
            }
            let causes: BTreeSet<usize> =
                plan_devs(version_at(r, rel - 1)).chain(plan_devs(version_at(r, rel))).filter(|&d| devs[d].1 == rel).collect();
            for d in causes {
                t.dev_changes.entry(p.clone()).or_default().entry(devs[d].0.clone()).or_default().push(r.id.clone());
            }
        }
    }
    for p in t.proc_req.keys() {
        let mut pairs = Vec::new();
        for a in 0..releases {
            for b in a + 1..releases {
                let changed = ordered
                    .iter()
                    .filter(|r| name(r) == *p)
                    .filter(|r| expected(r, a, DeploymentScope::Both, devs) != expected(r, b, DeploymentScope::Both, devs))
                    .map(|r| r.id.clone())
                    .collect();
                pairs.push(ReleasePair { from: release(a), to: release(b), changed });
            }
        }
        t.release_diffs.insert(p.clone(), pairs);
    }
    t
}

// ---- random structures for property checks ----

/// Registry of `n` developments introduced at random releases `01R1..01R<releases>`.
pub fn random_registry(rng: &mut impl Rng, n: usize, releases: usize) -> DevelopmentRegistry {
    let mut reg = DevelopmentRegistry::new();
    for r in 0..releases {
        reg.declared.insert(release(r));
    }
    let mut i = 0;
    while reg.developments.len() < n {
        let id: DevelopmentId = format!("CB{:02}{:04}", rng.gen_range(0..100), i).parse().expect("valid id");
        reg.insert(id, release(rng.gen_range(0..releases)));
        i += 1;
    }
    reg
}

const WORDS: [&str; 16] = [
    "UE", "shall", "report", "the", "threshold", "3.5", "dB", "cfg.value", "activateMeasurementSA", "maxA2Offset", "cell", "gap",
    "timer", "T310", "x", "2",
];

fn random_text(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..8);
    let mut s: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    if rng.gen_bool(0.5) {
        s.push("end.");
    }
    s.join(" ")
}

fn random_span(rng: &mut impl Rng) -> ContentSegment {
    let body = if rng.gen_bool(0.9) { vec![ContentSegment::text(random_text(rng))] } else { Vec::new() };
    ContentSegment::DeploymentSpan { dep: *DeploymentType::ALL.choose(rng).unwrap(), body }
}

fn random_body(rng: &mut impl Rng) -> Vec<ContentSegment> {
    (0..rng.gen_range(0..3))
        .map(|_| if rng.gen_bool(0.7) { ContentSegment::text(random_text(rng)) } else { random_span(rng) })
        .collect()
}

/// Canonical-form content with exactly `blocks` DevBlocks on distinct developments.
pub fn random_content(rng: &mut impl Rng, devs: &[DevelopmentId], blocks: usize) -> Vec<ContentSegment> {
    let mut chosen: Vec<&DevelopmentId> = devs.choose_multiple(rng, blocks).collect();
    chosen.shuffle(rng);
    let mut out = random_body(rng);
    for dev in chosen {
        out.push(ContentSegment::DevBlock { dev: dev.clone(), before: random_body(rng), after: random_body(rng) });
        out.extend(random_body(rng));
    }
    canonicalize(out)
}

/// A requirement with 1-3 DevBlocks in its open version, optionally preceded
/// by a closed version.
pub fn random_requirement(rng: &mut impl Rng, id: &str, reg: &DevelopmentRegistry, releases: usize) -> Requirement {
    let devs: Vec<DevelopmentId> = reg.developments.keys().cloned().collect();
    let blocks = rng.gen_range(1..=3).min(devs.len());
    let mut versions = Vec::new();
    let mut first = 0;
    if rng.gen_bool(0.3) {
        let last = rng.gen_range(0..releases - 1);
        let old_blocks = rng.gen_range(0..=1);
        versions.push(RequirementVersion {
            first_release: release(0),
            last_release: LastRelease::Closed(release(last)),
            content: random_content(rng, &devs, old_blocks),
        });
        first = last + 1;
    }
    versions.push(RequirementVersion {
        first_release: release(first),
        last_release: LastRelease::Open,
        content: random_content(rng, &devs, blocks),
    });
    Requirement { id: id.to_string(), versions, section_path: Vec::new(), line: 0 }
}

fn random_section(rng: &mut impl Rng, reg: &DevelopmentRegistry, path: &[String], depth: usize, next: &mut usize) -> Section {
    let title = format!("Section {}", *next);
    let mut path = path.to_vec();
    path.push(title.clone());
    let mut s = Section::new(title);
    for _ in 0..rng.gen_range(0..3) {
        *next += 1;
        let mut r = random_requirement(rng, &format!("REQ_R_{:04}", *next), reg, 4);
        r.section_path = path.clone();
        s.requirements.push(r);
    }
    if depth < 2 {
        for _ in 0..rng.gen_range(0..2) {
            *next += 1;
            s.subsections.push(random_section(rng, reg, &path, depth + 1, next));
        }
    }
    s
}

/// A canonical-form document with root requirements and nested sections.
pub fn random_document(rng: &mut impl Rng, name: &str, reg: &DevelopmentRegistry) -> SpecDocument {
    let mut next = 0;
    let mut doc = SpecDocument { name: name.to_string(), requirements: Vec::new(), sections: Vec::new() };
    for _ in 0..rng.gen_range(0..2) {
        next += 1;
        doc.requirements.push(random_requirement(rng, &format!("REQ_R_{next:04}"), reg, 4));
    }
    for _ in 0..rng.gen_range(0..3) {
        next += 1;
        doc.sections.push(random_section(rng, reg, &[], 0, &mut next));
    }
    doc
}
