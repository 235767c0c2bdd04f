//! L4: structural grammar of identifiers and content.

use std::collections::BTreeSet;

use crate::model::{walk_segments, ContentSegment, Requirement};

use super::{LintFinding, Location, Rule};

const TERMINAL: [char; 5] = ['.', '!', '?', ':', ';'];

fn last_text(content: &[ContentSegment]) -> Option<&str> {
    let mut last = None;
    walk_segments(content, &mut |s| {
        if let ContentSegment::PlainText { text } = s {
            last = Some(text.as_str());
        }
    });
    last
}

pub fn check_grammar(document: &str, req: &Requirement) -> Vec<LintFinding> {
    let mut out = Vec::new();
    if !Requirement::is_valid_id(&req.id) {
        out.push(LintFinding::new(
            Rule::Grammar,
            "id-format",
            Location::new(document, &req.id, None),
            "requirement id must be 3-64 characters of A-Z, 0-9 and _",
        ));
    }
    for version in &req.versions {
        let loc = || Location::new(document, &req.id, Some(version.first_release));
        let mut lower = BTreeSet::new();
        let mut empty = Vec::new();
        walk_segments(&version.content, &mut |s| {
            if let ContentSegment::DevBlock { dev, before, after } = s {
                if dev.as_str().chars().any(|c| c.is_ascii_lowercase()) {
                    lower.insert(dev.as_str().to_string());
                }
                if before.is_empty() {
                    empty.push(("empty-before", dev.as_str().to_string()));
                }
                if after.is_empty() {
                    empty.push(("empty-after", dev.as_str().to_string()));
                }
            }
        });
        for dev in lower {
            out.push(LintFinding::new(
                Rule::Grammar,
                "development-id-case",
                loc(),
                format!("development id {dev} should be upper case ({})", dev.to_ascii_uppercase()),
            ));
        }
        for (check, dev) in empty {
            let part = if check == "empty-before" { "before" } else { "after" };
            out.push(LintFinding::new(Rule::Grammar, check, loc(), format!("DevBlock {dev} has an empty {part}-part")));
        }
        match last_text(&version.content) {
            None => out.push(LintFinding::new(Rule::Grammar, "empty-version", loc(), "version has no text")),
            Some(t) if !t.trim_end().ends_with(TERMINAL) => {
                out.push(LintFinding::new(Rule::Grammar, "terminal-punctuation", loc(), "text does not end with terminal punctuation"))
            }
            Some(_) => {}
        }
    }
    out
}
