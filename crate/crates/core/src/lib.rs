//! Toolkit for internal telecom-style technical specifications.
//!
//! Requirements are written in a tagged, release-versioned text format.
//! This crate parses that format, resolves the effective text of a
//! requirement at a given release and deployment, lints corpora for
//! duplication, length, naming and dispersion problems, builds query
//! indexes over procedures, and extracts per-release datasets.

pub mod dataset;
pub mod diff;
pub mod exec;
pub mod index;
pub mod lexicon;
pub mod lint;
pub mod model;
pub mod parser;
pub mod resolver;
pub mod synth;
pub mod tags;
pub mod tokenizer;

pub use exec::Execution;
pub use model::{
    compare_releases, version_at, ContentSegment, DeploymentScope, DeploymentType, DevelopmentId,
    DevelopmentRegistry, LastRelease, ReleaseId, Requirement, RequirementVersion, Section, SpecDocument,
};
pub use parser::{parse_content, parse_document, parse_registry, serialize, validate_corpus, ParseError, ParseErrorKind};
