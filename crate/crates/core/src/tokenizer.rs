//! Technical tokenizer.
//!
//! Generic word tokenizers split `activateMeasurementSA`, `CB00XXXX` or
//! `[Before CB00XXXX]` into fragments and often strip digits. Here each of
//! those is a single token and digits are never dropped.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::model::{DevelopmentId, ReleaseId, Requirement};
use crate::tags::tag_prefix_len;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Identifier,
    RequirementId,
    DevelopmentId,
    ReleaseId,
    Number,
    Tag,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    /// Byte offset of the token in the tokenized text.
    pub start: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.start + self.text.len()
    }

    /// Comparison key used for phrase matching: words fold case, everything
    /// else is exact.
    pub fn key(&self) -> String {
        match self.kind {
            TokenKind::Word => self.text.to_lowercase(),
            _ => self.text.clone(),
        }
    }
}

fn is_chunk_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Classifies a run of word characters.
pub fn classify(chunk: &str) -> TokenKind {
    if DevelopmentId::is_valid(chunk) {
        return TokenKind::DevelopmentId;
    }
    if chunk.parse::<ReleaseId>().is_ok() {
        return TokenKind::ReleaseId;
    }
    let has_letter = chunk.chars().any(char::is_alphabetic);
    let has_digit = chunk.chars().any(char::is_numeric);
    let has_underscore = chunk.contains('_');
    if has_underscore && has_letter && Requirement::is_valid_id(chunk) && chunk.starts_with(|c: char| c.is_ascii_uppercase()) {
        return TokenKind::RequirementId;
    }
    let camel = chunk.chars().zip(chunk.chars().skip(1)).any(|(a, b)| a.is_lowercase() && b.is_uppercase());
    if (has_letter || has_digit) && (camel || has_underscore || (has_letter && has_digit)) {
        return TokenKind::Identifier;
    }
    if has_digit && chunk.chars().all(|c| c.is_numeric() || c == '.') {
        return TokenKind::Number;
    }
    if has_letter && chunk.chars().all(char::is_alphabetic) {
        return TokenKind::Word;
    }
    TokenKind::Punct
}

/// Splits text into technical tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '[' {
            if let Some(len) = tag_prefix_len(&text[i..]) {
                tokens.push(Token { text: text[i..i + len].to_string(), kind: TokenKind::Tag, start: i });
                while chars.peek().is_some_and(|&(j, _)| j < i + len) {
                    chars.next();
                }
                continue;
            }
        }
        if is_chunk_char(c) {
            let mut end = i;
            let mut prev_digit = false;
            while let Some(&(j, ch)) = chars.peek() {
                let keep = is_chunk_char(ch)
                    || (ch == '.' && prev_digit && text[j + 1..].starts_with(|n: char| n.is_ascii_digit()));
                if !keep {
                    break;
                }
                prev_digit = ch.is_ascii_digit();
                end = j + ch.len_utf8();
                chars.next();
            }
            let chunk = &text[i..end];
            tokens.push(Token { text: chunk.to_string(), kind: classify(chunk), start: i });
            continue;
        }
        chars.next();
        tokens.push(Token { text: c.to_string(), kind: TokenKind::Punct, start: i });
    }
    tokens
}

/// Rebuilds whitespace-normalized text: one space wherever the source had
/// whitespace between two tokens, nothing where they were adjacent.
pub fn detokenize(tokens: &[Token]) -> String {
    let mut out = String::new();
    let mut prev_end: Option<usize> = None;
    for t in tokens {
        if prev_end.is_some_and(|e| t.start > e) {
            out.push(' ');
        }
        out.push_str(&t.text);
        prev_end = Some(t.end());
    }
    out
}

/// Optional technical stop-word list. Ships empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// One token per line; blank lines are ignored. Matching is on lowercase words.
    pub fn parse(source: &str) -> Self {
        Self(source.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_lowercase).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

/// Lowercases words, drops punctuation, keeps every technical token verbatim.
pub fn normalize(tokens: &[Token]) -> Vec<Token> {
    normalize_with(tokens, &StopWords::default())
}

pub fn normalize_with(tokens: &[Token], stop: &StopWords) -> Vec<Token> {
    tokens
        .iter()
        .filter_map(|t| match t.kind {
            TokenKind::Punct => None,
            TokenKind::Word => {
                let lower = t.text.to_lowercase();
                (!stop.contains(&lower)).then(|| Token { text: lower, ..t.clone() })
            }
            _ => Some(t.clone()),
        })
        .collect()
}

/// Number of content-bearing (non-punctuation) tokens in `text`.
pub fn token_count(text: &str) -> usize {
    tokenize(text).iter().filter(|t| t.kind != TokenKind::Punct).count()
}
