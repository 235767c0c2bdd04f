//! Release resolution: effective requirement text at a release and
//! deployment, baselining of developments, and behaviour diffs.
//!
//! A DevBlock contributes its after-part once its development's introducing
//! release is reached and its before-part until then. Baselining rewrites a
//! requirement so the after-part is inlined from that release onward; the
//! resolved text at every release stays the same.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::{diff_units, split_sentences, DiffSegment, SegmentKind};
use crate::model::{
    canonicalize, dev_ids, ContentSegment, DeploymentScope, DevelopmentId, DevelopmentRegistry, LastRelease,
    ReleaseId, Requirement, RequirementVersion, SpecDocument,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("development {0} is not in the registry")]
    UnknownDevelopment(DevelopmentId),
    #[error("requirement {req} has no open version carrying development {dev}")]
    DevelopmentNotPresent { req: String, dev: DevelopmentId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedRequirement {
    pub id: String,
    pub release: ReleaseId,
    pub deployment: DeploymentScope,
    pub text: String,
    pub contributing_devs: BTreeSet<DevelopmentId>,
    /// Emitted plain-text pieces in order; `text` is these joined by spaces.
    #[serde(skip)]
    pub pieces: Vec<String>,
}

fn check_registered(content: &[ContentSegment], reg: &DevelopmentRegistry) -> Result<(), ResolveError> {
    match dev_ids(content).into_iter().find(|d| !reg.contains(d)) {
        Some(d) => Err(ResolveError::UnknownDevelopment(d.clone())),
        None => Ok(()),
    }
}

fn emit(
    segments: &[ContentSegment],
    release: ReleaseId,
    dep: DeploymentScope,
    reg: &DevelopmentRegistry,
    pieces: &mut Vec<String>,
    devs: &mut BTreeSet<DevelopmentId>,
) {
    for seg in segments {
        match seg {
            ContentSegment::PlainText { text } => pieces.push(text.clone()),
            ContentSegment::DevBlock { dev, before, after } => {
                let intro = reg.get(dev).expect("registration checked before emitting");
                if intro <= release {
                    devs.insert(dev.clone());
                    emit(after, release, dep, reg, pieces, devs);
                } else {
                    emit(before, release, dep, reg, pieces, devs);
                }
            }
            ContentSegment::DeploymentSpan { dep: span, body } => {
                if dep.includes(*span) {
                    emit(body, release, dep, reg, pieces, devs);
                }
            }
        }
    }
}

/// Resolves the tag-free text of `version` at `release`.
pub fn materialize_version(
    id: &str,
    version: &RequirementVersion,
    release: ReleaseId,
    dep: DeploymentScope,
    reg: &DevelopmentRegistry,
) -> Result<ResolvedRequirement, ResolveError> {
    check_registered(&version.content, reg)?;
    let mut pieces = Vec::new();
    let mut devs = BTreeSet::new();
    emit(&version.content, release, dep, reg, &mut pieces, &mut devs);
    Ok(ResolvedRequirement {
        id: id.to_string(),
        release,
        deployment: dep,
        text: pieces.join(" "),
        contributing_devs: devs,
        pieces,
    })
}

/// Effective text of `req` at `release`, or `None` when no version is valid there.
pub fn materialize(
    req: &Requirement,
    release: ReleaseId,
    dep: DeploymentScope,
    reg: &DevelopmentRegistry,
) -> Result<Option<ResolvedRequirement>, ResolveError> {
    req.version_at(release).map(|v| materialize_version(&req.id, v, release, dep, reg)).transpose()
}

/// Ordered, de-duplicated releases known to the corpus: registry releases
/// plus every release bounding a version.
pub fn release_universe<'a>(docs: impl IntoIterator<Item = &'a SpecDocument>, reg: &DevelopmentRegistry) -> Vec<ReleaseId> {
    let mut all = reg.releases();
    for doc in docs {
        for req in doc.requirements() {
            add_version_releases(req, &mut all);
        }
    }
    all.into_iter().collect()
}

fn add_version_releases(req: &Requirement, all: &mut BTreeSet<ReleaseId>) {
    for v in &req.versions {
        all.insert(v.first_release);
        if let LastRelease::Closed(r) = v.last_release {
            all.insert(r);
        }
    }
}

/// Latest release of `universe` (sorted) at which `version` is valid.
pub fn latest_release_in(version: &RequirementVersion, universe: &[ReleaseId]) -> Option<ReleaseId> {
    universe.iter().rev().find(|r| version.contains(**r)).copied()
}

fn replace_dev(segments: Vec<ContentSegment>, target: &DevelopmentId) -> Vec<ContentSegment> {
    let mut out = Vec::with_capacity(segments.len());
    for seg in segments {
        match seg {
            ContentSegment::DevBlock { dev, after, .. } if dev == *target => out.extend(after),
            ContentSegment::DeploymentSpan { dep, body } => {
                out.push(ContentSegment::DeploymentSpan { dep, body: replace_dev(body, target) });
            }
            other => out.push(other),
        }
    }
    out
}

/// Deletes the tags of development `dev` from the open version of `req`,
/// keeping its new behaviour.
///
/// The release universe used to find the release before the development's
/// introduction is the registry's releases plus the requirement's own.
pub fn baseline(req: &Requirement, dev: &DevelopmentId, reg: &DevelopmentRegistry) -> Result<Requirement, ResolveError> {
    let mut universe = reg.releases();
    add_version_releases(req, &mut universe);
    baseline_in(req, dev, reg, &universe.into_iter().collect::<Vec<_>>())
}

/// [`baseline`] against an explicit, sorted release universe.
pub fn baseline_in(
    req: &Requirement,
    dev: &DevelopmentId,
    reg: &DevelopmentRegistry,
    universe: &[ReleaseId],
) -> Result<Requirement, ResolveError> {
    let intro = reg.get(dev).ok_or_else(|| ResolveError::UnknownDevelopment(dev.clone()))?;
    let not_present = || ResolveError::DevelopmentNotPresent { req: req.id.clone(), dev: dev.clone() };
    let open_idx = req.versions.iter().position(RequirementVersion::is_open).ok_or_else(not_present)?;
    let open = &req.versions[open_idx];
    if !dev_ids(&open.content).contains(&dev) {
        return Err(not_present());
    }
    let inlined = canonicalize(replace_dev(open.content.clone(), dev));
    let mut out = req.clone();
    if intro <= open.first_release {
        out.versions[open_idx].content = inlined;
        return Ok(out);
    }
    // open.first_release < intro, so a release before intro exists in any
    // universe that contains open.first_release.
    let previous = universe.iter().rev().find(|r| **r < intro).copied().unwrap_or(open.first_release);
    out.versions[open_idx].last_release = LastRelease::Closed(previous.max(open.first_release));
    out.versions.insert(
        open_idx + 1,
        RequirementVersion { first_release: intro, last_release: LastRelease::Open, content: inlined },
    );
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorDiff {
    pub id: String,
    pub release_a: ReleaseId,
    pub release_b: ReleaseId,
    pub segments: Vec<DiffSegment>,
    pub causes: BTreeSet<DevelopmentId>,
}

impl BehaviorDiff {
    pub fn is_unchanged(&self) -> bool {
        self.segments.iter().all(|s| s.kind == SegmentKind::Unchanged)
    }

    pub fn texts(&self, kind: SegmentKind) -> Vec<&str> {
        self.segments.iter().filter(|s| s.kind == kind).map(|s| s.text.as_str()).collect()
    }
}

/// Developments whose DevBlocks are reachable under `dep` in `content`.
fn reachable_devs<'a>(content: &'a [ContentSegment], dep: DeploymentScope, out: &mut HashSet<&'a DevelopmentId>) {
    for seg in content {
        match seg {
            ContentSegment::PlainText { .. } => {}
            ContentSegment::DevBlock { dev, before, after } => {
                out.insert(dev);
                reachable_devs(before, dep, out);
                reachable_devs(after, dep, out);
            }
            ContentSegment::DeploymentSpan { dep: span, body } => {
                if dep.includes(*span) {
                    reachable_devs(body, dep, out);
                }
            }
        }
    }
}

fn units(resolved: &Option<ResolvedRequirement>) -> Vec<String> {
    resolved.as_ref().map_or_else(Vec::new, |r| r.pieces.iter().flat_map(|p| split_sentences(p)).collect())
}

/// Sentence-level behaviour difference of `req` between releases `a` and `b`.
///
/// A release where the requirement is not valid contributes no text, so the
/// whole text at the other release shows as added or removed. Causes are
/// developments reachable in either selected version whose activation
/// differs between the two releases.
pub fn diff_behavior(
    req: &Requirement,
    a: ReleaseId,
    b: ReleaseId,
    dep: DeploymentScope,
    reg: &DevelopmentRegistry,
) -> Result<BehaviorDiff, ResolveError> {
    let ra = materialize(req, a, dep, reg)?;
    let rb = materialize(req, b, dep, reg)?;
    let mut devs = HashSet::new();
    for v in [req.version_at(a), req.version_at(b)].into_iter().flatten() {
        reachable_devs(&v.content, dep, &mut devs);
    }
    let causes = devs
        .into_iter()
        .filter(|d| {
            let intro = reg.get(d).expect("registration checked by materialize");
            (intro <= a) != (intro <= b)
        })
        .cloned()
        .collect();
    Ok(BehaviorDiff { id: req.id.clone(), release_a: a, release_b: b, segments: diff_units(&units(&ra), &units(&rb)), causes })
}
