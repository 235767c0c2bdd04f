//! The inline tag grammar.
//!
//! Canonical tags are `[Before CBxxxxxx]`, `[CBxxxxxx]`, `[End CBxxxxxx]`,
//! `[SA]`, `[NSA]`, `[End SA]` and `[End NSA]`. Matching is case-sensitive.

use std::sync::OnceLock;

use regex::Regex;

use crate::model::{DeploymentType, DevelopmentId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tag {
    Before(DevelopmentId),
    After(DevelopmentId),
    EndDev(DevelopmentId),
    Deployment(DeploymentType),
    EndDeployment(DeploymentType),
}

impl Tag {
    pub fn render(&self) -> String {
        match self {
            Tag::Before(d) => format!("[Before {d}]"),
            Tag::After(d) => format!("[{d}]"),
            Tag::EndDev(d) => format!("[End {d}]"),
            Tag::Deployment(t) => format!("[{t}]"),
            Tag::EndDeployment(t) => format!("[End {t}]"),
        }
    }
}

fn strict() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\[(?:(?P<dkw>Before |End )?(?P<dev>CB[A-Za-z0-9]{6})|(?P<end>End )?(?P<dep>NSA|SA))\]").unwrap()
    })
}

/// Recognizable but possibly non-canonical spelling of a tag: any case,
/// extra inner spacing.
fn lenient() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\[\s*(?:(?P<kw>before|end)\s+)?(?P<name>cb[a-z0-9]{6}|nsa|sa)\s*\]").unwrap())
}

/// A canonical tag found in text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagMatch {
    pub start: usize,
    pub end: usize,
    pub tag: Tag,
}

/// All canonical tags in `text`, left to right.
pub fn find_tags(text: &str) -> Vec<TagMatch> {
    strict()
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).unwrap();
            let tag = if let Some(dev) = c.name("dev") {
                let dev = DevelopmentId::new_unchecked(dev.as_str());
                match c.name("dkw").map(|k| k.as_str()) {
                    Some("Before ") => Tag::Before(dev),
                    Some(_) => Tag::EndDev(dev),
                    None => Tag::After(dev),
                }
            } else {
                let dep = if &c["dep"] == "SA" { DeploymentType::SA } else { DeploymentType::NSA };
                if c.name("end").is_some() {
                    Tag::EndDeployment(dep)
                } else {
                    Tag::Deployment(dep)
                }
            };
            TagMatch { start: m.start(), end: m.end(), tag }
        })
        .collect()
}

/// True when `text` contains any canonical tag.
pub fn contains_tag(text: &str) -> bool {
    strict().is_match(text)
}

/// Length of the canonical tag starting exactly at `text[0]`, if any.
pub fn tag_prefix_len(text: &str) -> Option<usize> {
    strict().find(text).filter(|m| m.start() == 0).map(|m| m.end())
}

/// A tag-like spelling seen in plain text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagVariant {
    pub start: usize,
    pub text: String,
    /// The canonical rendering this spelling most likely meant.
    pub canonical: String,
    /// Upper-cased development id, when the variant names one.
    pub dev: Option<String>,
}

/// Tag-like spellings in `text` that are not canonical tags.
pub fn find_variants(text: &str) -> Vec<TagVariant> {
    lenient()
        .captures_iter(text)
        .filter_map(|c| {
            let m = c.get(0).unwrap();
            if tag_prefix_len(m.as_str()) == Some(m.len()) {
                return None;
            }
            let name = c["name"].to_ascii_uppercase();
            let kw = c.name("kw").map(|k| k.as_str().to_ascii_lowercase());
            let is_dev = name.starts_with("CB");
            let canonical = match (kw.as_deref(), is_dev) {
                (Some("before"), true) => format!("[Before {name}]"),
                (Some(_), _) => format!("[End {name}]"),
                (None, _) => format!("[{name}]"),
            };
            Some(TagVariant {
                start: m.start(),
                text: m.as_str().to_string(),
                canonical,
                dev: is_dev.then_some(name),
            })
        })
        .collect()
}
