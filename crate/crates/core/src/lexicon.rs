//! Internal dictionary of procedure names.
//!
//! Each canonical procedure lists the phrasings that refer to it. Matching is
//! done over tokens, so `A2` inside `maxA2Offset` never matches; words match
//! case-insensitively and identifiers exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::tokenizer::{detokenize, tokenize, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("invalid lexicon file: {0}")]
    Format(String),
    #[error("alias `{alias}` maps to both `{first}` and `{second}`")]
    ConflictingAlias { alias: String, first: String, second: String },
    #[error("alias `{0}` has no tokens")]
    EmptyAlias(String),
}

#[derive(Debug, Default, Clone)]
struct TrieNode {
    children: HashMap<String, usize>,
    /// Canonical name and matched alias key when a phrase ends here.
    terminal: Option<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
    reverse: BTreeMap<String, String>,
    trie: Vec<TrieNode>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self { entries: BTreeMap::new(), reverse: BTreeMap::new(), trie: vec![TrieNode::default()] }
    }
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

/// Normalized matching key of a phrase: token keys joined by single spaces.
pub fn phrase_key(phrase: &str) -> String {
    tokenize(phrase).iter().map(Token::key).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mention {
    pub canonical: String,
    pub surface: String,
    /// Half-open token range `[start, end)`.
    pub token_span: (usize, usize),
    /// Key of the alias that matched; equals the canonical key for canonical usage.
    #[serde(skip)]
    pub alias_key: String,
}

impl Mention {
    /// True when the text used a different alias than the canonical name.
    pub fn is_alias_usage(&self) -> bool {
        self.alias_key != phrase_key(&self.canonical)
    }
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a lexicon from `(canonical, aliases)` pairs. Every canonical
    /// name is added as its own alias.
    pub fn from_entries<I, A>(entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (String, A)>,
        A: IntoIterator<Item = String>,
    {
        let mut lex = Lexicon::new();
        for (canonical, aliases) in entries {
            lex.insert(&canonical, &canonical)?;
            for alias in aliases {
                lex.insert(&canonical, &alias)?;
            }
        }
        Ok(lex)
    }

    fn insert(&mut self, canonical: &str, alias: &str) -> Result<(), LexiconError> {
        let tokens = tokenize(alias);
        if tokens.is_empty() {
            return Err(LexiconError::EmptyAlias(alias.to_string()));
        }
        let key = tokens.iter().map(Token::key).collect::<Vec<_>>().join(" ");
        if let Some(existing) = self.reverse.get(&key) {
            if existing != canonical {
                return Err(LexiconError::ConflictingAlias {
                    alias: alias.to_string(),
                    first: existing.clone(),
                    second: canonical.to_string(),
                });
            }
        }
        self.reverse.insert(key.clone(), canonical.to_string());
        self.entries.entry(canonical.to_string()).or_default().insert(alias.to_string());

        let mut node = 0;
        for t in &tokens {
            let k = t.key();
            node = match self.trie[node].children.get(&k) {
                Some(&next) => next,
                None => {
                    self.trie.push(TrieNode::default());
                    let next = self.trie.len() - 1;
                    self.trie[node].children.insert(k, next);
                    next
                }
            };
        }
        self.trie[node].terminal = Some((canonical.to_string(), key));
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn canonical_names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn aliases(&self, canonical: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(canonical)
    }

    pub fn entries(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.entries
    }

    /// Number of normalized alias keys.
    pub fn reverse_len(&self) -> usize {
        self.reverse.len()
    }

    /// Canonical name for any alias phrasing.
    pub fn canonical_of(&self, phrase: &str) -> Option<&str> {
        self.reverse.get(&phrase_key(phrase)).map(String::as_str)
    }

    /// JSON object form, `{canonical: [aliases…]}`.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<&String, Vec<&String>> =
            self.entries.iter().map(|(c, a)| (c, a.iter().filter(|x| *x != c).collect())).collect();
        serde_json::to_string_pretty(&map).expect("string map serializes")
    }
}

/// Loads a lexicon from its JSON file form.
pub fn load_lexicon(source: &str) -> Result<Lexicon, LexiconError> {
    if source.trim().is_empty() {
        return Ok(Lexicon::new());
    }
    // keep file order so conflicts name the first definition
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(source).map_err(|e| LexiconError::Format(e.to_string()))?;
    let mut entries = Vec::with_capacity(map.len());
    for (canonical, value) in map {
        let aliases: Vec<String> = serde_json::from_value(value)
            .map_err(|e| LexiconError::Format(format!("aliases of `{canonical}`: {e}")))?;
        entries.push((canonical, aliases));
    }
    Lexicon::from_entries(entries)
}

/// Leftmost-longest, non-overlapping alias matches over a token stream.
pub fn find_mentions(tokens: &[Token], lex: &Lexicon) -> Vec<Mention> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut node = 0;
        let mut best: Option<(usize, &(String, String))> = None;
        for (j, t) in tokens[i..].iter().enumerate() {
            match lex.trie[node].children.get(&t.key()) {
                Some(&next) => node = next,
                None => break,
            }
            if let Some(term) = &lex.trie[node].terminal {
                best = Some((i + j + 1, term));
            }
        }
        match best {
            Some((end, (canonical, key))) => {
                out.push(Mention {
                    canonical: canonical.clone(),
                    surface: detokenize(&tokens[i..end]),
                    token_span: (i, end),
                    alias_key: key.clone(),
                });
                i = end;
            }
            None => i += 1,
        }
    }
    out
}

/// Convenience: tokenize `text` and find mentions in it.
pub fn mentions_in(text: &str, lex: &Lexicon) -> Vec<Mention> {
    find_mentions(&tokenize(text), lex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A2: &str = r#"{"A2 measurement": ["A2 measurement for Handover", "A2 measurement for the activation of Inter-frequency measurements"]}"#;

    #[test]
    fn load_examples() {
        let lex = load_lexicon(A2).unwrap();
        assert_eq!(lex.canonical_names().count(), 1);
        assert_eq!(lex.reverse_len(), 3);
        assert_eq!(lex.canonical_of("A2 MEASUREMENT for handover"), Some("A2 measurement"));
        assert!(load_lexicon("").unwrap().is_empty());
        assert!(load_lexicon("{}").unwrap().is_empty());
        assert!(matches!(load_lexicon("[1]"), Err(LexiconError::Format(_))));
    }

    #[test]
    fn conflicting_alias() {
        let err = load_lexicon(r#"{"A": ["shared name"], "B": ["Shared Name"]}"#).unwrap_err();
        assert_eq!(err, LexiconError::ConflictingAlias { alias: "Shared Name".into(), first: "A".into(), second: "B".into() });
        // a canonical listed under another canonical conflicts too
        assert!(load_lexicon(r#"{"A": [], "B": ["A"]}"#).is_err());
    }

    #[test]
    fn mention_examples() {
        let lex = load_lexicon(A2).unwrap();
        let m = mentions_in("the A2 measurement for Handover shall be started.", &lex);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].canonical, "A2 measurement");
        assert_eq!(m[0].surface, "A2 measurement for Handover");
        assert_eq!(m[0].token_span, (1, 5));
        assert!(m[0].is_alias_usage());

        assert!(mentions_in("nothing relevant here.", &lex).is_empty());

        let m = mentions_in("A2 measurement, then A2 measurement for the activation of Inter-frequency measurements.", &lex);
        assert_eq!(m.len(), 2);
        assert!(!m[0].is_alias_usage());
        assert_eq!(m[1].surface, "A2 measurement for the activation of Inter-frequency measurements");
    }

    #[test]
    fn identifiers_do_not_match_inside_longer_tokens() {
        let lex = load_lexicon(A2).unwrap();
        assert!(mentions_in("maxA2 measurement", &lex).is_empty());
        assert!(mentions_in("a2 measurement", &lex).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let lex = load_lexicon(A2).unwrap();
        assert_eq!(load_lexicon(&lex.to_json()).unwrap(), lex);
    }

    fn lexicon() -> Lexicon {
        Lexicon::from_entries([
            ("cell reselection".to_string(), vec!["reselection of cells".to_string()]),
            ("A2 measurement".to_string(), vec!["A2 measurement for Handover".to_string()]),
        ])
        .unwrap()
    }

    fn phrase() -> impl Strategy<Value = &'static str> {
        prop::sample::select(vec![
            "cell reselection",
            "reselection of cells",
            "A2 measurement",
            "A2 measurement for Handover",
            "the",
            "UE",
            "shall",
            "report",
            "cells",
            "for",
            ".",
        ])
    }

    proptest! {
        #[test]
        fn concatenation_shifts_mentions(a in prop::collection::vec(phrase(), 0..8), b in prop::collection::vec(phrase(), 0..8)) {
            let lex = lexicon();
            let ta = tokenize(&a.join(" "));
            let tb = tokenize(&b.join(" "));
            let tab = tokenize(&format!("{} | {}", a.join(" "), b.join(" ")));
            let mut expected = find_mentions(&ta, &lex);
            let shift = ta.len() + 1;
            expected.extend(find_mentions(&tb, &lex).into_iter().map(|mut m| {
                m.token_span = (m.token_span.0 + shift, m.token_span.1 + shift);
                m
            }));
            prop_assert_eq!(find_mentions(&tab, &lex), expected);
        }

        #[test]
        fn canonicalization_is_idempotent(words in prop::collection::vec(phrase(), 0..10)) {
            let lex = lexicon();
            let text = words.join(" ");
            let tokens = tokenize(&text);
            let mentions = find_mentions(&tokens, &lex);
            let mut rewritten = Vec::new();
            let mut i = 0;
            for m in &mentions {
                rewritten.extend(tokens[i..m.token_span.0].iter().map(|t| t.text.clone()));
                rewritten.push(m.canonical.clone());
                i = m.token_span.1;
            }
            rewritten.extend(tokens[i..].iter().map(|t| t.text.clone()));
            let again = mentions_in(&rewritten.join(" "), &lex);
            prop_assert_eq!(again.len(), mentions.len());
            for m in again {
                prop_assert_eq!(&m.surface, &m.canonical);
            }
        }
    }
}
