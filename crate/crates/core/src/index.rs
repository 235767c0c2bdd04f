//! Procedure-centred query index over a resolved corpus.
//!
//! A procedure is a canonical lexicon name. Requirements whose resolved text
//! mentions no known procedure are filed under [`UNMAPPED`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::lexicon::{mentions_in, Lexicon, LexiconError};
use crate::model::{DeploymentScope, DeploymentType, DevelopmentId, DevelopmentRegistry, ReleaseId, Requirement, SpecDocument};
use crate::resolver::{diff_behavior, materialize, release_universe, BehaviorDiff, ResolveError};

pub const INDEX_FORMAT_VERSION: u32 = 1;
pub const UNMAPPED: &str = "(unmapped)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("release {0} is not in the release universe")]
    UnknownRelease(ReleaseId),
    #[error("development {0} is not in the registry")]
    UnknownDevelopment(DevelopmentId),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("invalid index file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecIndex {
    pub format_version: u32,
    pub release_universe: Vec<ReleaseId>,
    pub proc_release: BTreeMap<String, BTreeMap<ReleaseId, Vec<IndexEntry>>>,
    pub proc_dev: BTreeMap<String, BTreeMap<DevelopmentId, Vec<BehaviorDiff>>>,
    pub proc_req: BTreeMap<String, BTreeSet<String>>,
    pub proc_dep: BTreeMap<String, BTreeMap<ReleaseId, BTreeMap<DeploymentType, Vec<IndexEntry>>>>,
    /// Kept so release diffs between arbitrary releases can be recomputed.
    pub requirements: Vec<Requirement>,
    pub registry: DevelopmentRegistry,
    pub lexicon: BTreeMap<String, BTreeSet<String>>,
    #[serde(skip)]
    lex: Lexicon,
}

/// What one requirement contributes to the index.
#[derive(Default)]
struct Contribution {
    release: Vec<(String, ReleaseId, IndexEntry)>,
    dev: Vec<(String, DevelopmentId, BehaviorDiff)>,
    dep: Vec<(String, ReleaseId, DeploymentType, IndexEntry)>,
}

fn procedures(text: &str, lex: &Lexicon) -> BTreeSet<String> {
    let mut procs: BTreeSet<String> = mentions_in(text, lex).into_iter().map(|m| m.canonical).collect();
    if procs.is_empty() {
        procs.insert(UNMAPPED.to_string());
    }
    procs
}

fn contribute(req: &Requirement, universe: &[ReleaseId], reg: &DevelopmentRegistry, lex: &Lexicon) -> Result<Contribution, ResolveError> {
    let mut c = Contribution::default();
    let mut procs_at: Vec<BTreeSet<String>> = Vec::with_capacity(universe.len());
    for &r in universe {
        let Some(both) = materialize(req, r, DeploymentScope::Both, reg)? else {
            procs_at.push(BTreeSet::new());
            continue;
        };
        let procs = procedures(&both.text, lex);
        for dep in DeploymentType::ALL {
            let text = materialize(req, r, DeploymentScope::Only(dep), reg)?.expect("valid at r").text;
            for p in &procs {
                c.dep.push((p.clone(), r, dep, IndexEntry { id: req.id.clone(), text: text.clone() }));
            }
        }
        for p in &procs {
            c.release.push((p.clone(), r, IndexEntry { id: req.id.clone(), text: both.text.clone() }));
        }
        procs_at.push(procs);
    }
    for i in 1..universe.len() {
        let diff = diff_behavior(req, universe[i - 1], universe[i], DeploymentScope::Both, reg)?;
        if diff.is_unchanged() || diff.causes.is_empty() {
            continue;
        }
        let procs: BTreeSet<&String> = procs_at[i - 1].iter().chain(&procs_at[i]).collect();
        for p in procs {
            for d in &diff.causes {
                c.dev.push((p.clone(), d.clone(), diff.clone()));
            }
        }
    }
    Ok(c)
}

pub fn build_index(docs: &[SpecDocument], reg: &DevelopmentRegistry, lex: &Lexicon) -> Result<SpecIndex, IndexError> {
    build_index_with(docs, reg, lex, Execution::default())
}

pub fn build_index_with(
    docs: &[SpecDocument],
    reg: &DevelopmentRegistry,
    lex: &Lexicon,
    exec: Execution,
) -> Result<SpecIndex, IndexError> {
    let universe = release_universe(docs, reg);
    let reqs: Vec<&Requirement> = docs.iter().flat_map(|d| d.requirements()).collect();
    let parts = exec.map(&reqs, |req| contribute(req, &universe, reg, lex));

    let mut ix = SpecIndex {
        format_version: INDEX_FORMAT_VERSION,
        release_universe: universe,
        proc_release: BTreeMap::new(),
        proc_dev: BTreeMap::new(),
        proc_req: BTreeMap::new(),
        proc_dep: BTreeMap::new(),
        requirements: reqs.iter().map(|r| (*r).clone()).collect(),
        registry: reg.clone(),
        lexicon: lex.entries().clone(),
        lex: lex.clone(),
    };
    for part in parts {
        let part = part?;
        for (p, r, e) in part.release {
            ix.proc_req.entry(p.clone()).or_default().insert(e.id.clone());
            ix.proc_release.entry(p).or_default().entry(r).or_default().push(e);
        }
        for (p, d, diff) in part.dev {
            ix.proc_dev.entry(p).or_default().entry(d).or_default().push(diff);
        }
        for (p, r, dep, e) in part.dep {
            ix.proc_dep.entry(p).or_default().entry(r).or_default().entry(dep).or_default().push(e);
        }
    }
    Ok(ix)
}

impl SpecIndex {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("index serializes")
    }

    pub fn from_json(source: &str) -> Result<Self, IndexError> {
        let mut ix: SpecIndex = serde_json::from_str(source).map_err(|e| IndexError::Format(e.to_string()))?;
        if ix.format_version != INDEX_FORMAT_VERSION {
            return Err(IndexError::Format(format!(
                "format version {} is not supported (expected {INDEX_FORMAT_VERSION})",
                ix.format_version
            )));
        }
        ix.lex = Lexicon::from_entries(ix.lexicon.clone()).map_err(|e: LexiconError| IndexError::Format(e.to_string()))?;
        Ok(ix)
    }

    /// Canonical procedure for any alias, or `None` if unknown.
    pub fn canonical(&self, procedure: &str) -> Option<String> {
        if procedure == UNMAPPED {
            return Some(UNMAPPED.to_string());
        }
        self.lex.canonical_of(procedure).map(str::to_string)
    }

    fn check_release(&self, r: ReleaseId) -> Result<(), IndexError> {
        if self.release_universe.binary_search(&r).is_ok() {
            Ok(())
        } else {
            Err(IndexError::UnknownRelease(r))
        }
    }

    pub fn latest_release(&self) -> Option<ReleaseId> {
        self.release_universe.last().copied()
    }
}

/// How does procedure X behave in release Y?
pub fn query_behavior(ix: &SpecIndex, procedure: &str, r: ReleaseId) -> Result<Vec<IndexEntry>, IndexError> {
    ix.check_release(r)?;
    Ok(ix
        .canonical(procedure)
        .and_then(|p| ix.proc_release.get(&p))
        .and_then(|m| m.get(&r))
        .cloned()
        .unwrap_or_default())
}

/// What changed in procedure X between releases A and B? All-unchanged diffs
/// are omitted.
pub fn query_release_diff(ix: &SpecIndex, procedure: &str, a: ReleaseId, b: ReleaseId) -> Result<Vec<BehaviorDiff>, IndexError> {
    ix.check_release(a)?;
    ix.check_release(b)?;
    let Some(ids) = ix.canonical(procedure).and_then(|p| ix.proc_req.get(&p)) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for req in ix.requirements.iter().filter(|r| ids.contains(&r.id)) {
        let diff = diff_behavior(req, a, b, DeploymentScope::Both, &ix.registry)?;
        if !diff.is_unchanged() {
            out.push(diff);
        }
    }
    Ok(out)
}

/// How was procedure X modified by development D?
pub fn query_dev_changes(ix: &SpecIndex, procedure: &str, d: &DevelopmentId) -> Result<Vec<BehaviorDiff>, IndexError> {
    if !ix.registry.contains(d) {
        return Err(IndexError::UnknownDevelopment(d.clone()));
    }
    Ok(ix
        .canonical(procedure)
        .and_then(|p| ix.proc_dev.get(&p))
        .and_then(|m| m.get(d))
        .cloned()
        .unwrap_or_default())
}

/// Which requirements relate to procedure X?
pub fn query_requirements(ix: &SpecIndex, procedure: &str) -> BTreeSet<String> {
    ix.canonical(procedure).and_then(|p| ix.proc_req.get(&p)).cloned().unwrap_or_default()
}

/// How does procedure X behave under deployment `dep`? Defaults to the
/// latest release of the universe.
pub fn query_deployment(
    ix: &SpecIndex,
    procedure: &str,
    dep: DeploymentType,
    release: Option<ReleaseId>,
) -> Result<Vec<IndexEntry>, IndexError> {
    let r = match release {
        Some(r) => {
            ix.check_release(r)?;
            r
        }
        None => match ix.latest_release() {
            Some(r) => r,
            None => return Ok(Vec::new()),
        },
    };
    Ok(ix
        .canonical(procedure)
        .and_then(|p| ix.proc_dep.get(&p))
        .and_then(|m| m.get(&r))
        .and_then(|m| m.get(&dep))
        .cloned()
        .unwrap_or_default())
}
