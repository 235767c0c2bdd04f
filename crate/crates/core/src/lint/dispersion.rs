//! L5: procedures whose requirements are spread over many sections.

use std::collections::BTreeMap;

use crate::lexicon::{mentions_in, Lexicon};
use crate::model::{walk_segments, ContentSegment, SpecDocument};

use super::{LintConfig, LintFinding, Location, Rule};

pub fn check_dispersion(docs: &[SpecDocument], lex: &Lexicon, config: &LintConfig) -> Vec<LintFinding> {
    // canonical -> (document, section path) -> first requirement seen there
    let mut seen: BTreeMap<String, BTreeMap<(String, Vec<String>), Location>> = BTreeMap::new();
    for doc in docs {
        for req in doc.requirements() {
            for version in &req.versions {
                walk_segments(&version.content, &mut |s| {
                    if let ContentSegment::PlainText { text } = s {
                        for m in mentions_in(text, lex) {
                            seen.entry(m.canonical)
                                .or_default()
                                .entry((doc.name.clone(), req.section_path.clone()))
                                .or_insert_with(|| Location::new(&doc.name, &req.id, None));
                        }
                    }
                });
            }
        }
    }
    seen.into_iter()
        .filter(|(_, sections)| sections.len() > config.max_sections)
        .map(|(canonical, sections)| {
            let n = sections.len();
            let mut locations: Vec<Location> = sections.into_values().collect();
            locations.sort();
            let mut f = LintFinding::new(
                Rule::Dispersion,
                "dispersed-procedure",
                locations[0].clone(),
                format!("`{canonical}` is specified in {n} sections, limit is {}", config.max_sections),
            )
            .with_score(n as f64);
            f.locations = locations;
            f
        })
        .collect()
}
