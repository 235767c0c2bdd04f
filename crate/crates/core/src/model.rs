//! Domain types shared by every other module.
//!
//! Everything here is immutable once built; the parser, resolver, linter and
//! index only ever read these values (or build new ones).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors raised when a textual identifier does not follow its grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("bad release id `{0}` (expected NNRk, e.g. 01R1)")]
    Release(String),
    #[error("bad development id `{0}` (expected CB followed by 6 alphanumerics)")]
    Development(String),
    #[error("bad deployment type `{0}` (expected SA or NSA)")]
    Deployment(String),
}

/// A software release such as `01R1`.
///
/// Ordering is by `(major, revision)` compared as integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReleaseId {
    major: u8,
    revision: u32,
}

impl ReleaseId {
    /// `major` must fit in two decimal digits and `revision` must be positive.
    pub fn new(major: u8, revision: u32) -> Option<Self> {
        (major <= 99 && revision >= 1).then_some(Self { major, revision })
    }

    pub fn major(self) -> u8 {
        self.major
    }

    pub fn revision(self) -> u32 {
        self.revision
    }
}

impl fmt::Display for ReleaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}R{}", self.major, self.revision)
    }
}

impl FromStr for ReleaseId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || IdError::Release(s.to_string());
        let b = s.as_bytes();
        if b.len() < 4 || !b[0].is_ascii_digit() || !b[1].is_ascii_digit() || b[2] != b'R' {
            return Err(bad());
        }
        let rev = &s[3..];
        if !rev.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let major = (b[0] - b'0') * 10 + (b[1] - b'0');
        let revision: u32 = rev.parse().map_err(|_| bad())?;
        ReleaseId::new(major, revision).ok_or_else(bad)
    }
}

/// Total order on releases.
pub fn compare_releases(a: ReleaseId, b: ReleaseId) -> Ordering {
    a.cmp(&b)
}

/// A tracked development such as `CB00XXXX`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DevelopmentId(String);

impl DevelopmentId {
    pub(crate) fn new_unchecked(s: &str) -> Self {
        debug_assert!(Self::is_valid(s));
        Self(s.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True when `s` is `CB` followed by exactly six ASCII alphanumerics.
    pub fn is_valid(s: &str) -> bool {
        s.len() == 8 && s.starts_with("CB") && s[2..].bytes().all(|c| c.is_ascii_alphanumeric())
    }
}

impl fmt::Display for DevelopmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for DevelopmentId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if Self::is_valid(s) {
            Ok(Self(s.to_string()))
        } else {
            Err(IdError::Development(s.to_string()))
        }
    }
}

/// Network deployment a span of behaviour applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeploymentType {
    /// Standalone.
    SA,
    /// Non-standalone.
    NSA,
}

impl DeploymentType {
    pub const ALL: [DeploymentType; 2] = [DeploymentType::SA, DeploymentType::NSA];

    pub fn as_str(self) -> &'static str {
        match self {
            DeploymentType::SA => "SA",
            DeploymentType::NSA => "NSA",
        }
    }
}

impl fmt::Display for DeploymentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeploymentType {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SA" => Ok(DeploymentType::SA),
            "NSA" => Ok(DeploymentType::NSA),
            _ => Err(IdError::Deployment(s.to_string())),
        }
    }
}

/// Which deployment-scoped spans to keep when resolving text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum DeploymentScope {
    #[default]
    Both,
    Only(DeploymentType),
}

impl DeploymentScope {
    pub fn includes(self, dep: DeploymentType) -> bool {
        match self {
            DeploymentScope::Both => true,
            DeploymentScope::Only(d) => d == dep,
        }
    }
}

impl fmt::Display for DeploymentScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeploymentScope::Both => f.write_str("both"),
            DeploymentScope::Only(d) => d.fmt(f),
        }
    }
}

impl FromStr for DeploymentScope {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("both") {
            return Ok(DeploymentScope::Both);
        }
        s.to_ascii_uppercase().parse().map(DeploymentScope::Only).map_err(|_| IdError::Deployment(s.to_string()))
    }
}

macro_rules! serde_via_str {
    ($($ty:ty),*) => {$(
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

serde_via_str!(ReleaseId, DevelopmentId, DeploymentType, DeploymentScope);

/// One node of a requirement's content tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContentSegment {
    PlainText { text: String },
    DevBlock { dev: DevelopmentId, before: Vec<ContentSegment>, after: Vec<ContentSegment> },
    DeploymentSpan { dep: DeploymentType, body: Vec<ContentSegment> },
}

impl ContentSegment {
    pub fn text(s: impl Into<String>) -> Self {
        ContentSegment::PlainText { text: s.into() }
    }

    /// Visits this segment and everything nested in it, pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ContentSegment)) {
        f(self);
        match self {
            ContentSegment::PlainText { .. } => {}
            ContentSegment::DevBlock { before, after, .. } => {
                before.iter().chain(after).for_each(|s| s.walk(f));
            }
            ContentSegment::DeploymentSpan { body, .. } => body.iter().for_each(|s| s.walk(f)),
        }
    }
}

/// Pre-order walk over a whole segment list.
pub fn walk_segments<'a>(segments: &'a [ContentSegment], f: &mut impl FnMut(&'a ContentSegment)) {
    for s in segments {
        s.walk(f);
    }
}

/// Development ids referenced by DevBlocks anywhere in `segments`, in first-seen order.
pub fn dev_ids(segments: &[ContentSegment]) -> Vec<&DevelopmentId> {
    let mut out: Vec<&DevelopmentId> = Vec::new();
    walk_segments(segments, &mut |s| {
        if let ContentSegment::DevBlock { dev, .. } = s {
            if !out.contains(&dev) {
                out.push(dev);
            }
        }
    });
    out
}

/// Merges adjacent plain-text segments and drops blank ones, recursively.
pub fn canonicalize(segments: Vec<ContentSegment>) -> Vec<ContentSegment> {
    let mut out: Vec<ContentSegment> = Vec::with_capacity(segments.len());
    for seg in segments {
        let seg = match seg {
            ContentSegment::PlainText { text } => {
                let t = text.trim();
                if t.is_empty() {
                    continue;
                }
                if let Some(ContentSegment::PlainText { text: prev }) = out.last_mut() {
                    prev.push(' ');
                    prev.push_str(t);
                    continue;
                }
                ContentSegment::text(t)
            }
            ContentSegment::DevBlock { dev, before, after } => {
                ContentSegment::DevBlock { dev, before: canonicalize(before), after: canonicalize(after) }
            }
            ContentSegment::DeploymentSpan { dep, body } => ContentSegment::DeploymentSpan { dep, body: canonicalize(body) },
        };
        out.push(seg);
    }
    out
}

/// End of a version's validity range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LastRelease {
    Closed(ReleaseId),
    Open,
}

impl fmt::Display for LastRelease {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LastRelease::Closed(r) => r.fmt(f),
            LastRelease::Open => f.write_str("open"),
        }
    }
}

impl FromStr for LastRelease {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "open" {
            Ok(LastRelease::Open)
        } else {
            s.parse().map(LastRelease::Closed)
        }
    }
}

serde_via_str!(LastRelease);

/// One release-scoped version of a requirement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementVersion {
    pub first_release: ReleaseId,
    pub last_release: LastRelease,
    pub content: Vec<ContentSegment>,
}

impl RequirementVersion {
    pub fn contains(&self, r: ReleaseId) -> bool {
        self.first_release <= r
            && match self.last_release {
                LastRelease::Closed(last) => r <= last,
                LastRelease::Open => true,
            }
    }

    pub fn is_open(&self) -> bool {
        self.last_release == LastRelease::Open
    }

    pub fn overlaps(&self, other: &RequirementVersion) -> bool {
        let ends_before = |v: &RequirementVersion, start: ReleaseId| match v.last_release {
            LastRelease::Closed(last) => last < start,
            LastRelease::Open => false,
        };
        !(ends_before(self, other.first_release) || ends_before(other, self.first_release))
    }
}

/// A uniquely identified requirement with one or more versions.
///
/// `line` is the 1-based source line of the block header; it is not part of
/// structural equality.
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    pub versions: Vec<RequirementVersion>,
    pub section_path: Vec<String>,
    #[serde(default)]
    pub line: usize,
}

impl PartialEq for Requirement {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.versions == other.versions && self.section_path == other.section_path
    }
}

impl Requirement {
    /// The unique version valid at `r`, if any.
    pub fn version_at(&self, r: ReleaseId) -> Option<&RequirementVersion> {
        self.versions.iter().find(|v| v.contains(r))
    }

    pub fn open_version(&self) -> Option<&RequirementVersion> {
        self.versions.iter().find(|v| v.is_open())
    }

    /// True when `id` follows the identifier grammar: 3 to 64 of `A-Z`, `0-9`, `_`.
    pub fn is_valid_id(id: &str) -> bool {
        (3..=64).contains(&id.len()) && id.bytes().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == b'_')
    }
}

/// Free function form of [`Requirement::version_at`].
pub fn version_at(req: &Requirement, r: ReleaseId) -> Option<&RequirementVersion> {
    req.version_at(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub title: String,
    pub requirements: Vec<Requirement>,
    pub subsections: Vec<Section>,
}

impl Section {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), requirements: Vec::new(), subsections: Vec::new() }
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a Requirement>) {
        out.extend(&self.requirements);
        for s in &self.subsections {
            s.collect(out);
        }
    }
}

/// A parsed specification document.
///
/// Requirements placed before the first heading live in `requirements`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpecDocument {
    pub name: String,
    pub requirements: Vec<Requirement>,
    pub sections: Vec<Section>,
}

impl SpecDocument {
    /// All requirements in document order (depth-first through sections).
    pub fn requirements(&self) -> Vec<&Requirement> {
        let mut out: Vec<&Requirement> = self.requirements.iter().collect();
        for s in &self.sections {
            s.collect(&mut out);
        }
        out
    }

    pub fn find(&self, id: &str) -> Option<&Requirement> {
        self.requirements().into_iter().find(|r| r.id == id)
    }
}

/// Maps each development to the release that introduces it.
///
/// `declared` holds releases listed on their own in the registry file; they
/// extend the release universe even when no development or version uses them.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DevelopmentRegistry {
    pub developments: BTreeMap<DevelopmentId, ReleaseId>,
    pub declared: BTreeSet<ReleaseId>,
}

impl DevelopmentRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dev: DevelopmentId, release: ReleaseId) -> Option<ReleaseId> {
        self.developments.insert(dev, release)
    }

    pub fn get(&self, dev: &DevelopmentId) -> Option<ReleaseId> {
        self.developments.get(dev).copied()
    }

    pub fn contains(&self, dev: &DevelopmentId) -> bool {
        self.developments.contains_key(dev)
    }

    /// Declared releases plus every introducing release.
    pub fn releases(&self) -> BTreeSet<ReleaseId> {
        self.declared.iter().chain(self.developments.values()).copied().collect()
    }
}

impl FromIterator<(DevelopmentId, ReleaseId)> for DevelopmentRegistry {
    fn from_iter<T: IntoIterator<Item = (DevelopmentId, ReleaseId)>>(iter: T) -> Self {
        Self { developments: iter.into_iter().collect(), declared: BTreeSet::new() }
    }
}
