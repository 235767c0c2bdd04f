//! Line-oriented `.spec` format.
//!
//! ```text
//! %spec 1
//! %name Mobility
//!
//! # Measurements
//! ## Triggers
//!
//! === REQ REQ_A2_0001 ===
//! --- VERSION first=01R1 last=01R1 ---
//! The UE shall [Before CB00XXXX] stop [CB00XXXX] start [End CB00XXXX] reporting.
//! --- VERSION first=01R2 last=open ---
//! The UE shall start reporting. [SA] Only in standalone. [End SA]
//! === END ===
//! ```
//!
//! Headings nest by `#` count. Requirement ids are taken verbatim from the
//! block header; the id grammar is enforced by lint, not here.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::model::{
    canonicalize, walk_segments, ContentSegment, DeploymentType, DevelopmentId, DevelopmentRegistry, LastRelease,
    ReleaseId, Requirement, RequirementVersion, Section, SpecDocument,
};
use crate::tags::{find_tags, Tag};

pub const FORMAT_HEADER: &str = "%spec 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ParseErrorKind {
    UnbalancedTag,
    NestedDevBlock,
    BadReleaseId,
    BadRequirementHeader,
    DuplicateId,
    DanglingEnd,
    /// Corpus validation: a DevBlock names a development missing from the registry.
    UnknownDevelopment,
    /// Corpus validation warning: a development is introduced before the
    /// version that carries its tags. Resolution treats it as active.
    DevelopmentPredatesRequirement,
}

impl ParseErrorKind {
    pub fn is_warning(self) -> bool {
        self == ParseErrorKind::DevelopmentPredatesRequirement
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{}{line}: {kind}: {message}", document.as_deref().map(|d| format!("{d}:")).unwrap_or_default())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub document: Option<String>,
}

impl ParseError {
    fn new(kind: ParseErrorKind, line: usize, message: impl Into<String>) -> Self {
        Self { kind, line: line.max(1), message: message.into(), document: None }
    }

    pub fn in_document(mut self, name: impl Into<String>) -> Self {
        self.document = Some(name.into());
        self
    }

    fn shifted(mut self, offset: usize) -> Self {
        self.line += offset;
        self
    }
}

enum Frame {
    Root,
    Before { dev: DevelopmentId, line: usize },
    After { dev: DevelopmentId, before: Vec<ContentSegment>, line: usize },
    Span { dep: DeploymentType },
}

impl Frame {
    fn is_dev(&self) -> bool {
        matches!(self, Frame::Before { .. } | Frame::After { .. })
    }
}

struct ContentParser {
    stack: Vec<(Frame, Vec<ContentSegment>)>,
}

impl ContentParser {
    fn new() -> Self {
        Self { stack: vec![(Frame::Root, Vec::new())] }
    }

    fn push_text(&mut self, text: &str) {
        let t = text.trim();
        if !t.is_empty() {
            self.stack.last_mut().unwrap().1.push(ContentSegment::text(t));
        }
    }

    fn nearest_dev(&self) -> Option<usize> {
        self.stack.iter().rposition(|(f, _)| f.is_dev())
    }

    /// Pops every frame above `idx`; they are all spans closed implicitly.
    fn close_spans_above(&mut self, idx: usize) {
        while self.stack.len() > idx + 1 {
            let (frame, body) = self.stack.pop().unwrap();
            let Frame::Span { dep } = frame else { unreachable!("only spans sit above the nearest dev frame") };
            self.stack.last_mut().unwrap().1.push(ContentSegment::DeploymentSpan { dep, body: canonicalize(body) });
        }
    }

    fn tag(&mut self, tag: Tag, line: usize) -> Result<(), ParseError> {
        use ParseErrorKind::*;
        match tag {
            Tag::Before(dev) => {
                if let Some(i) = self.nearest_dev() {
                    let open = match &self.stack[i].0 {
                        Frame::Before { dev, .. } | Frame::After { dev, .. } => dev.clone(),
                        _ => unreachable!(),
                    };
                    return Err(ParseError::new(NestedDevBlock, line, format!("[Before {dev}] inside open block for {open}")));
                }
                self.stack.push((Frame::Before { dev, line }, Vec::new()));
            }
            Tag::After(dev) => {
                let Some(i) = self.nearest_dev() else {
                    return Err(ParseError::new(UnbalancedTag, line, format!("[{dev}] without [Before {dev}]")));
                };
                match &self.stack[i].0 {
                    Frame::Before { dev: open, .. } if *open == dev => {}
                    Frame::After { dev: open, .. } if *open == dev => {
                        return Err(ParseError::new(UnbalancedTag, line, format!("second [{dev}] in the same block")));
                    }
                    _ => return Err(ParseError::new(UnbalancedTag, line, format!("[{dev}] without [Before {dev}]"))),
                }
                self.close_spans_above(i);
                let (frame, before) = self.stack.pop().unwrap();
                let Frame::Before { dev, line } = frame else { unreachable!() };
                self.stack.push((Frame::After { dev, before: canonicalize(before), line }, Vec::new()));
            }
            Tag::EndDev(dev) => {
                let Some(i) = self.nearest_dev() else {
                    return Err(ParseError::new(DanglingEnd, line, format!("[End {dev}] without an open block")));
                };
                match &self.stack[i].0 {
                    Frame::After { dev: open, .. } if *open == dev => {}
                    Frame::Before { dev: open, .. } if *open == dev => {
                        return Err(ParseError::new(UnbalancedTag, line, format!("[End {dev}] before [{dev}]")));
                    }
                    _ => return Err(ParseError::new(DanglingEnd, line, format!("[End {dev}] without an open block"))),
                }
                self.close_spans_above(i);
                let (frame, after) = self.stack.pop().unwrap();
                let Frame::After { dev, before, .. } = frame else { unreachable!() };
                let block = ContentSegment::DevBlock { dev, before, after: canonicalize(after) };
                self.stack.last_mut().unwrap().1.push(block);
            }
            Tag::Deployment(dep) => {
                if self.stack.iter().any(|(f, _)| matches!(f, Frame::Span { dep: d } if *d == dep)) {
                    return Err(ParseError::new(UnbalancedTag, line, format!("[{dep}] nested inside another [{dep}]")));
                }
                self.stack.push((Frame::Span { dep }, Vec::new()));
            }
            Tag::EndDeployment(dep) => {
                let floor = self.nearest_dev().map_or(0, |i| i + 1);
                let found = (floor..self.stack.len()).rev().find(|&i| matches!(self.stack[i].0, Frame::Span { dep: d } if d == dep));
                match found {
                    Some(i) => {
                        self.close_spans_above(i);
                        let (_, body) = self.stack.pop().unwrap();
                        self.stack.last_mut().unwrap().1.push(ContentSegment::DeploymentSpan { dep, body: canonicalize(body) });
                    }
                    None if self.stack[..floor].iter().any(|(f, _)| matches!(f, Frame::Span { dep: d } if *d == dep)) => {
                        return Err(ParseError::new(UnbalancedTag, line, format!("[End {dep}] crosses a development block")));
                    }
                    None => return Err(ParseError::new(DanglingEnd, line, format!("[End {dep}] without [{dep}]"))),
                }
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<ContentSegment>, ParseError> {
        if let Some(i) = self.nearest_dev() {
            let (dev, line) = match &self.stack[i].0 {
                Frame::Before { dev, line } | Frame::After { dev, line, .. } => (dev.clone(), *line),
                _ => unreachable!(),
            };
            return Err(ParseError::new(ParseErrorKind::UnbalancedTag, line, format!("no [End {dev}] for block")));
        }
        self.close_spans_above(0);
        Ok(canonicalize(self.stack.pop().unwrap().1))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses one version's content body into a segment tree.
///
/// Error lines are 1-based within `text`.
pub fn parse_content(text: &str) -> Result<Vec<ContentSegment>, Vec<ParseError>> {
    let mut parser = ContentParser::new();
    let mut pos = 0;
    for m in find_tags(text) {
        parser.push_text(&text[pos..m.start]);
        pos = m.end;
        parser.tag(m.tag, line_of(text, m.start)).map_err(|e| vec![e])?;
    }
    parser.push_text(&text[pos..]);
    parser.finish().map_err(|e| vec![e])
}

fn req_header() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^=== REQ (\S+) ===$").unwrap())
}

fn version_header() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^--- VERSION first=(\S+) last=(\S+) ---$").unwrap())
}

fn heading() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(#+)\s+(\S.*)$").unwrap())
}

const END_LINE: &str = "=== END ===";

struct PendingVersion {
    line: usize,
    header: Option<(ReleaseId, LastRelease)>,
    body: Vec<String>,
}

struct PendingBlock {
    id: String,
    line: usize,
    versions: Vec<PendingVersion>,
    errors: Vec<ParseError>,
}

impl PendingBlock {
    fn finish(self) -> Result<Requirement, Vec<ParseError>> {
        use ParseErrorKind::*;
        let mut errors = self.errors;
        let mut versions = Vec::new();
        for v in self.versions {
            let content_start = v.line;
            let content = match parse_content(&v.body.join("\n")) {
                Ok(c) => c,
                Err(es) => {
                    errors.extend(es.into_iter().map(|e| e.shifted(content_start)));
                    continue;
                }
            };
            if let Some((first_release, last_release)) = v.header {
                if let LastRelease::Closed(last) = last_release {
                    if last < first_release {
                        errors.push(ParseError::new(BadReleaseId, v.line, format!("last release {last} precedes first release {first_release}")));
                        continue;
                    }
                }
                versions.push((v.line, RequirementVersion { first_release, last_release, content }));
            }
        }
        if errors.is_empty() && versions.is_empty() {
            errors.push(ParseError::new(BadRequirementHeader, self.line, format!("requirement {} has no versions", self.id)));
        }
        for (i, (line, a)) in versions.iter().enumerate() {
            for (_, b) in &versions[..i] {
                if a.overlaps(b) {
                    errors.push(ParseError::new(
                        BadRequirementHeader,
                        *line,
                        format!("version {}..{} overlaps {}..{}", a.first_release, a.last_release, b.first_release, b.last_release),
                    ));
                }
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(Requirement {
            id: self.id,
            versions: versions.into_iter().map(|(_, v)| v).collect(),
            section_path: Vec::new(),
            line: self.line,
        })
    }
}

struct DocBuilder {
    doc: SpecDocument,
    stack: Vec<(usize, Section)>,
    seen: HashSet<String>,
}

impl DocBuilder {
    fn pop_section(&mut self) {
        let (_, section) = self.stack.pop().unwrap();
        match self.stack.last_mut() {
            Some((_, parent)) => parent.subsections.push(section),
            None => self.doc.sections.push(section),
        }
    }

    fn open_section(&mut self, level: usize, title: &str) {
        while self.stack.last().is_some_and(|(l, _)| *l >= level) {
            self.pop_section();
        }
        self.stack.push((level, Section::new(title)));
    }

    fn add(&mut self, mut req: Requirement) {
        req.section_path = self.stack.iter().map(|(_, s)| s.title.clone()).collect();
        match self.stack.last_mut() {
            Some((_, s)) => s.requirements.push(req),
            None => self.doc.requirements.push(req),
        }
    }

    fn finish(mut self) -> SpecDocument {
        while !self.stack.is_empty() {
            self.pop_section();
        }
        self.doc
    }
}

/// Parses as much of `source` as possible, returning the document built from
/// every well-formed requirement block together with all errors found.
pub fn parse_document_lossy(source: &str) -> (SpecDocument, Vec<ParseError>) {
    use ParseErrorKind::*;
    let mut builder = DocBuilder { doc: SpecDocument::default(), stack: Vec::new(), seen: HashSet::new() };
    let mut errors = Vec::new();
    let mut block: Option<PendingBlock> = None;
    let mut in_preamble = true;

    for (idx, raw) in source.split('\n').enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();

        if let Some(b) = block.as_mut() {
            if line == END_LINE {
                let b = block.take().unwrap();
                let id = b.id.clone();
                match b.finish() {
                    Ok(req) if builder.seen.contains(&req.id) => {
                        errors.push(ParseError::new(DuplicateId, req.line, format!("duplicate requirement id {id}")));
                    }
                    Ok(req) => {
                        builder.seen.insert(req.id.clone());
                        builder.add(req);
                    }
                    Err(es) => errors.extend(es),
                }
            } else if line.starts_with("--- VERSION") {
                let header = match version_header().captures(line) {
                    Some(c) => match (c[1].parse::<ReleaseId>(), c[2].parse::<LastRelease>()) {
                        (Ok(f), Ok(l)) => Some((f, l)),
                        (Err(e), _) | (_, Err(e)) => {
                            b.errors.push(ParseError::new(BadReleaseId, lineno, e.to_string()));
                            None
                        }
                    },
                    None => {
                        b.errors.push(ParseError::new(BadRequirementHeader, lineno, format!("malformed version header `{line}`")));
                        None
                    }
                };
                b.versions.push(PendingVersion { line: lineno, header, body: Vec::new() });
            } else if let Some(v) = b.versions.last_mut() {
                v.body.push(line.to_string());
            } else if !line.is_empty() {
                b.errors.push(ParseError::new(BadRequirementHeader, lineno, "content before the first version header"));
            }
            continue;
        }

        if line.is_empty() {
            continue;
        }
        if in_preamble && line.starts_with('%') {
            if let Some(name) = line.strip_prefix("%name ") {
                builder.doc.name = name.trim().to_string();
            } else if line != FORMAT_HEADER {
                errors.push(ParseError::new(BadRequirementHeader, lineno, format!("unknown header line `{line}`")));
            }
            continue;
        }
        in_preamble = false;

        if line.starts_with("=== REQ") {
            let (id, errs) = match req_header().captures(line) {
                Some(c) => (c[1].to_string(), Vec::new()),
                None => (
                    String::new(),
                    vec![ParseError::new(BadRequirementHeader, lineno, format!("malformed requirement header `{line}`"))],
                ),
            };
            block = Some(PendingBlock { id, line: lineno, versions: Vec::new(), errors: errs });
        } else if let Some(c) = heading().captures(line) {
            builder.open_section(c[1].len(), c[2].trim());
        } else if line == END_LINE {
            errors.push(ParseError::new(BadRequirementHeader, lineno, "=== END === outside a requirement block"));
        } else {
            errors.push(ParseError::new(BadRequirementHeader, lineno, format!("unexpected text outside a requirement block: `{line}`")));
        }
    }
    if let Some(b) = block {
        errors.push(ParseError::new(BadRequirementHeader, b.line, format!("requirement {} is missing `{END_LINE}`", b.id)));
    }
    errors.sort_by_key(|e| e.line);
    (builder.finish(), errors)
}

/// Parses a whole document. All errors are reported together.
pub fn parse_document(source: &str) -> Result<SpecDocument, Vec<ParseError>> {
    let (doc, errors) = parse_document_lossy(source);
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(errors)
    }
}

/// Renders a segment list in the inline tag grammar.
pub fn serialize_content(segments: &[ContentSegment]) -> String {
    let mut parts: Vec<String> = Vec::new();
    for seg in segments {
        match seg {
            ContentSegment::PlainText { text } => parts.push(text.clone()),
            ContentSegment::DevBlock { dev, before, after } => {
                parts.push(Tag::Before(dev.clone()).render());
                parts.extend(non_empty(serialize_content(before)));
                parts.push(Tag::After(dev.clone()).render());
                parts.extend(non_empty(serialize_content(after)));
                parts.push(Tag::EndDev(dev.clone()).render());
            }
            ContentSegment::DeploymentSpan { dep, body } => {
                parts.push(Tag::Deployment(*dep).render());
                parts.extend(non_empty(serialize_content(body)));
                parts.push(Tag::EndDeployment(*dep).render());
            }
        }
    }
    parts.join(" ")
}

fn non_empty(s: String) -> Option<String> {
    (!s.is_empty()).then_some(s)
}

fn write_requirement(out: &mut String, req: &Requirement) {
    out.push_str(&format!("=== REQ {} ===\n", req.id));
    for v in &req.versions {
        out.push_str(&format!("--- VERSION first={} last={} ---\n", v.first_release, v.last_release));
        let body = serialize_content(&v.content);
        if !body.is_empty() {
            out.push_str(&body);
            out.push('\n');
        }
    }
    out.push_str(END_LINE);
    out.push_str("\n\n");
}

fn write_section(out: &mut String, section: &Section, depth: usize) {
    out.push_str(&format!("{} {}\n\n", "#".repeat(depth), section.title));
    for r in &section.requirements {
        write_requirement(out, r);
    }
    for s in &section.subsections {
        write_section(out, s, depth + 1);
    }
}

/// Canonical text form of a document (LF line endings).
pub fn serialize(doc: &SpecDocument) -> String {
    let mut out = String::from(FORMAT_HEADER);
    out.push('\n');
    if !doc.name.is_empty() {
        out.push_str(&format!("%name {}\n", doc.name));
    }
    if !doc.requirements.is_empty() || !doc.sections.is_empty() {
        out.push('\n');
    }
    for r in &doc.requirements {
        write_requirement(&mut out, r);
    }
    for s in &doc.sections {
        write_section(&mut out, s, 1);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("registry line {line}: {message}")]
pub struct RegistryError {
    pub line: usize,
    pub message: String,
}

/// Parses a development registry: `<DevelopmentId> <ReleaseId>` per line,
/// a bare `<ReleaseId>` declares a release, `#` starts a comment.
pub fn parse_registry(source: &str) -> Result<DevelopmentRegistry, RegistryError> {
    let mut reg = DevelopmentRegistry::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        let fields: Vec<&str> = text.split_whitespace().collect();
        let err = |message: String| RegistryError { line, message };
        match fields.as_slice() {
            [] => {}
            [release] => {
                reg.declared.insert(release.parse().map_err(|e: crate::model::IdError| err(e.to_string()))?);
            }
            [dev, release] => {
                let dev: DevelopmentId = dev.parse().map_err(|e: crate::model::IdError| err(e.to_string()))?;
                let release: ReleaseId = release.parse().map_err(|e: crate::model::IdError| err(e.to_string()))?;
                if let Some(prev) = reg.get(&dev).filter(|p| *p != release) {
                    return Err(err(format!("{dev} registered for both {prev} and {release}")));
                }
                reg.insert(dev, release);
            }
            _ => return Err(err(format!("expected `<DevelopmentId> <ReleaseId>`, got `{text}`"))),
        }
    }
    Ok(reg)
}

/// Renders a registry in the format read by [`parse_registry`].
pub fn serialize_registry(reg: &DevelopmentRegistry) -> String {
    let mut out = String::new();
    for r in &reg.declared {
        out.push_str(&format!("{r}\n"));
    }
    for (d, r) in &reg.developments {
        out.push_str(&format!("{d} {r}\n"));
    }
    out
}

/// Corpus-level checks across already-parsed documents: duplicate ids,
/// unregistered developments, and developments introduced before the
/// version carrying their tags (reported as warnings).
pub fn validate_corpus(docs: &[SpecDocument], reg: &DevelopmentRegistry) -> Vec<ParseError> {
    use ParseErrorKind::*;
    let mut errors = Vec::new();
    let mut owners: BTreeMap<&str, &str> = BTreeMap::new();
    for doc in docs {
        for req in doc.requirements() {
            if let Some(first) = owners.insert(&req.id, &doc.name) {
                errors.push(
                    ParseError::new(DuplicateId, req.line, format!("requirement id {} also defined in {first}", req.id))
                        .in_document(&doc.name),
                );
            }
            for v in &req.versions {
                let mut reported = HashSet::new();
                walk_segments(&v.content, &mut |s| {
                    let ContentSegment::DevBlock { dev, .. } = s else { return };
                    if !reported.insert(dev.clone()) {
                        return;
                    }
                    match reg.get(dev) {
                        None => errors.push(
                            ParseError::new(UnknownDevelopment, req.line, format!("{} references unregistered development {dev}", req.id))
                                .in_document(&doc.name),
                        ),
                        Some(intro) if intro < v.first_release => errors.push(
                            ParseError::new(
                                DevelopmentPredatesRequirement,
                                req.line,
                                format!("{dev} is introduced in {intro}, before version {} of {} begins", v.first_release, req.id),
                            )
                            .in_document(&doc.name),
                        ),
                        Some(_) => {}
                    }
                });
            }
        }
    }
    errors
}
