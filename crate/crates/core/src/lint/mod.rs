//! Corpus linting for the five specification challenges.
//!
//! | rule | problem                               | severity |
//! |------|---------------------------------------|----------|
//! | L1   | duplicated requirement content        | High     |
//! | L2   | over-long, non-modular requirements   | High     |
//! | L3   | non-standard names and tag spellings  | High     |
//! | L4   | structural grammar problems           | Medium   |
//! | L5   | procedures dispersed across sections  | Low      |

mod dispersion;
mod duplication;
mod grammar;
mod length;
mod standardization;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::lexicon::Lexicon;
use crate::model::{DevelopmentRegistry, ReleaseId, SpecDocument};
use crate::resolver::release_universe;

pub use dispersion::check_dispersion;
pub use duplication::{detect_duplication, detect_duplication_with, jaccard, shingles};
pub use grammar::check_grammar;
pub use length::check_length;
pub use standardization::check_standardization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "L1_Duplication")]
    Duplication,
    #[serde(rename = "L2_Length")]
    Length,
    #[serde(rename = "L3_Standardization")]
    Standardization,
    #[serde(rename = "L4_Grammar")]
    Grammar,
    #[serde(rename = "L5_Dispersion")]
    Dispersion,
}

impl Rule {
    pub const ALL: [Rule; 5] = [Rule::Duplication, Rule::Length, Rule::Standardization, Rule::Grammar, Rule::Dispersion];

    pub fn severity(self) -> Severity {
        match self {
            Rule::Duplication | Rule::Length | Rule::Standardization => Severity::High,
            Rule::Grammar => Severity::Medium,
            Rule::Dispersion => Severity::Low,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Rule::Duplication => "L1_Duplication",
            Rule::Length => "L2_Length",
            Rule::Standardization => "L3_Standardization",
            Rule::Grammar => "L4_Grammar",
            Rule::Dispersion => "L5_Dispersion",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Low,
    Medium,
    High,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Severity::Low),
            "medium" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            _ => Err(format!("unknown severity `{s}` (expected low, medium or high)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub document: String,
    pub requirement: String,
    /// First release of the version the finding is about.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<ReleaseId>,
}

impl Location {
    pub fn new(document: &str, requirement: &str, version: Option<ReleaseId>) -> Self {
        Self { document: document.to_string(), requirement: requirement.to_string(), version }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.document, self.requirement)?;
        if let Some(v) = self.version {
            write!(f, "@{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LintFinding {
    pub rule: Rule,
    pub severity: Severity,
    /// Which check of the rule fired, e.g. `near-duplicate` or `alias-usage`.
    pub check: String,
    pub location: Location,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub related: Option<Location>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub locations: Vec<Location>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score: Option<f64>,
}

impl LintFinding {
    pub fn new(rule: Rule, check: &str, location: Location, message: impl Into<String>) -> Self {
        Self {
            rule,
            severity: rule.severity(),
            check: check.to_string(),
            location,
            related: None,
            locations: Vec::new(),
            message: message.into(),
            score: None,
        }
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.score = Some(score);
        self
    }

    pub fn with_related(mut self, related: Location) -> Self {
        self.related = Some(related);
        self
    }
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<6} {} [{}] {}: {}", self.severity.to_string().to_uppercase(), self.rule, self.check, self.location, self.message)?;
        if let Some(score) = self.score {
            write!(f, " (score {})", format_score(score))?;
        }
        if let Some(r) = &self.related {
            write!(f, " (related: {r})")?;
        }
        Ok(())
    }
}

fn format_score(score: f64) -> String {
    if score.fract() == 0.0 {
        format!("{score:.0}")
    } else {
        format!("{score:.3}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleToggles {
    #[serde(rename = "L1")]
    pub duplication: bool,
    #[serde(rename = "L2")]
    pub length: bool,
    #[serde(rename = "L3")]
    pub standardization: bool,
    #[serde(rename = "L4")]
    pub grammar: bool,
    #[serde(rename = "L5")]
    pub dispersion: bool,
}

impl Default for RuleToggles {
    fn default() -> Self {
        Self { duplication: true, length: true, standardization: true, grammar: true, dispersion: true }
    }
}

impl RuleToggles {
    pub fn enabled(&self, rule: Rule) -> bool {
        match rule {
            Rule::Duplication => self.duplication,
            Rule::Length => self.length,
            Rule::Standardization => self.standardization,
            Rule::Grammar => self.grammar,
            Rule::Dispersion => self.dispersion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LintConfig {
    pub shingle_k: usize,
    pub dup_threshold: f64,
    pub max_tokens: usize,
    pub max_procedures: usize,
    pub max_sections: usize,
    pub rules: RuleToggles,
}

impl Default for LintConfig {
    fn default() -> Self {
        Self { shingle_k: 5, dup_threshold: 0.7, max_tokens: 250, max_procedures: 3, max_sections: 2, rules: RuleToggles::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid lint config: {0}")]
    Format(String),
    #[error("invalid lint config: {0}")]
    Range(&'static str),
}

impl LintConfig {
    pub fn from_json(source: &str) -> Result<Self, ConfigError> {
        let cfg: LintConfig = serde_json::from_str(source).map_err(|e| ConfigError::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.shingle_k < 2 {
            return Err(ConfigError::Range("shingle_k must be at least 2"));
        }
        if !(self.dup_threshold > 0.0 && self.dup_threshold <= 1.0) {
            return Err(ConfigError::Range("dup_threshold must be in (0, 1]"));
        }
        if self.max_tokens == 0 {
            return Err(ConfigError::Range("max_tokens must be positive"));
        }
        if self.max_procedures == 0 {
            return Err(ConfigError::Range("max_procedures must be at least 1"));
        }
        if self.max_sections == 0 {
            return Err(ConfigError::Range("max_sections must be at least 1"));
        }
        Ok(())
    }
}

fn sort_key(f: &LintFinding) -> impl Ord + '_ {
    (&f.location.document, &f.location.requirement, f.rule, f.location.version, &f.check, &f.related, &f.message)
}

/// Sorts findings by (document, requirement, rule), then by the remaining
/// fields so the order is total.
pub fn sort_findings(findings: &mut [LintFinding]) {
    findings.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
}

/// Runs every enabled rule over the corpus.
pub fn lint_corpus(docs: &[SpecDocument], reg: &DevelopmentRegistry, lex: &Lexicon, config: &LintConfig) -> Vec<LintFinding> {
    lint_corpus_with(docs, reg, lex, config, Execution::default())
}

pub fn lint_corpus_with(
    docs: &[SpecDocument],
    reg: &DevelopmentRegistry,
    lex: &Lexicon,
    config: &LintConfig,
    exec: Execution,
) -> Vec<LintFinding> {
    let universe = release_universe(docs, reg);
    let mut findings = Vec::new();
    if config.rules.duplication {
        findings.extend(detect_duplication_with(docs, reg, config, exec));
    }
    let per_doc = exec.map(docs, |doc| {
        let mut out = Vec::new();
        for req in doc.requirements() {
            if config.rules.length {
                out.extend(check_length(&doc.name, req, &universe, reg, lex, config));
            }
            if config.rules.grammar {
                out.extend(check_grammar(&doc.name, req));
            }
        }
        out
    });
    findings.extend(per_doc.into_iter().flatten());
    if config.rules.standardization {
        findings.extend(check_standardization(docs, lex));
    }
    if config.rules.dispersion {
        findings.extend(check_dispersion(docs, lex, config));
    }
    sort_findings(&mut findings);
    findings
}

/// One JSON object per line.
pub fn to_jsonl(findings: &[LintFinding]) -> String {
    findings.iter().map(|f| serde_json::to_string(f).expect("finding serializes") + "\n").collect()
}

/// Human-readable report, one line per finding.
pub fn to_text(findings: &[LintFinding]) -> String {
    findings.iter().map(|f| format!("{f}\n")).collect()
}
