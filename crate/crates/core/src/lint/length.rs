//! L2: over-long and non-modular requirement versions.

use std::collections::BTreeSet;

use crate::lexicon::{mentions_in, Lexicon};
use crate::model::{walk_segments, ContentSegment, DeploymentScope, DeploymentType, DevelopmentRegistry, ReleaseId, Requirement};
use crate::resolver::{latest_release_in, materialize_version};
use crate::tokenizer::token_count;

use super::{LintConfig, LintFinding, Location, Rule};

/// Deployment types of all spans in `content`, pre-order.
fn span_sequence(content: &[ContentSegment]) -> Vec<DeploymentType> {
    let mut seq = Vec::new();
    walk_segments(content, &mut |s| {
        if let ContentSegment::DeploymentSpan { dep, .. } = s {
            seq.push(*dep);
        }
    });
    seq
}

/// Checks every version of `req`. Length and procedure counts use the text
/// resolved at the latest universe release where the version is valid.
pub fn check_length(
    document: &str,
    req: &Requirement,
    universe: &[ReleaseId],
    reg: &DevelopmentRegistry,
    lex: &Lexicon,
    config: &LintConfig,
) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for version in &req.versions {
        let loc = || Location::new(document, &req.id, Some(version.first_release));
        let release = latest_release_in(version, universe).unwrap_or(version.first_release);
        if let Ok(resolved) = materialize_version(&req.id, version, release, DeploymentScope::Both, reg) {
            let n = token_count(&resolved.text);
            if n > config.max_tokens {
                out.push(
                    LintFinding::new(Rule::Length, "over-length", loc(), format!("{n} tokens at {release}, limit is {}", config.max_tokens))
                        .with_score(n as f64),
                );
            }
            let procs: BTreeSet<String> = mentions_in(&resolved.text, lex).into_iter().map(|m| m.canonical).collect();
            if procs.len() > config.max_procedures {
                let names: Vec<&str> = procs.iter().map(String::as_str).collect();
                out.push(
                    LintFinding::new(
                        Rule::Length,
                        "too-many-procedures",
                        loc(),
                        format!("covers {} procedures ({}), limit is {}", procs.len(), names.join(", "), config.max_procedures),
                    )
                    .with_score(procs.len() as f64),
                );
            }
        }
        let seq = span_sequence(&version.content);
        if DeploymentType::ALL.iter().all(|d| seq.contains(d)) {
            out.push(LintFinding::new(Rule::Length, "mixed-deployment", loc(), "mixes SA and NSA behaviour in one requirement"));
        }
        let switches = seq.windows(2).filter(|w| w[0] != w[1]).count();
        if switches > 1 {
            out.push(
                LintFinding::new(Rule::Length, "alternating-deployment", loc(), format!("deployment spans alternate {switches} times"))
                    .with_score(switches as f64),
            );
        }
    }
    out
}
