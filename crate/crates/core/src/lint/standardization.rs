//! L3: non-canonical procedure names and tag spellings.

use std::collections::{BTreeMap, BTreeSet};

use crate::lexicon::{mentions_in, Lexicon};
use crate::model::{walk_segments, ContentSegment, SpecDocument};
use crate::tags::find_variants;

use super::{LintFinding, Location, Rule};

/// Alias usages and tag variants are looked for in plain text only; tags
/// that parsed are canonical by construction.
pub fn check_standardization(docs: &[SpecDocument], lex: &Lexicon) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for doc in docs {
        for req in doc.requirements() {
            // development -> whether it appears as a parsed block / as a variant
            let mut styles: BTreeMap<String, (bool, bool)> = BTreeMap::new();
            for version in &req.versions {
                let loc = || Location::new(&doc.name, &req.id, Some(version.first_release));
                walk_segments(&version.content, &mut |s| match s {
                    ContentSegment::PlainText { text } => {
                        for m in mentions_in(text, lex).into_iter().filter(|m| m.is_alias_usage()) {
                            out.push(LintFinding::new(
                                Rule::Standardization,
                                "alias-usage",
                                loc(),
                                format!("`{}` should be written as `{}`", m.surface, m.canonical),
                            ));
                        }
                        for v in find_variants(text) {
                            out.push(LintFinding::new(
                                Rule::Standardization,
                                "tag-style",
                                loc(),
                                format!("tag spelled `{}`, expected `{}`", v.text, v.canonical),
                            ));
                            if let Some(dev) = v.dev {
                                styles.entry(dev).or_default().1 = true;
                            }
                        }
                    }
                    ContentSegment::DevBlock { dev, .. } => {
                        styles.entry(dev.as_str().to_ascii_uppercase()).or_default().0 = true;
                    }
                    ContentSegment::DeploymentSpan { .. } => {}
                });
            }
            let mixed: BTreeSet<_> = styles.into_iter().filter(|(_, (a, b))| *a && *b).map(|(d, _)| d).collect();
            for dev in mixed {
                out.push(LintFinding::new(
                    Rule::Standardization,
                    "mixed-tag-styles",
                    Location::new(&doc.name, &req.id, None),
                    format!("development {dev} is tagged in more than one style"),
                ));
            }
        }
    }
    out
}
