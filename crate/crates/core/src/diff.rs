//! Sentence-level diff with longest-common-subsequence alignment.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Added,
    Removed,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiffSegment {
    pub kind: SegmentKind,
    pub text: String,
}

/// Splits text into sentences at `.` or `;` followed by whitespace or the end
/// of the text, so `3.5` or `cfg.value` never split.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if (b == b'.' || b == b';') && bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace()) {
            push_trimmed(&mut out, &text[start..=i]);
            start = i + 1;
        }
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let t = s.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

/// Matched index pairs of one longest common subsequence of `a` and `b`.
fn lcs_pairs(a: &[String], b: &[String]) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    // table[i][j] = LCS length of a[i..] and b[j..]
    let mut table = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i][j] = if a[i] == b[j] { table[i + 1][j + 1] + 1 } else { table[i + 1][j].max(table[i][j + 1]) };
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut pairs = Vec::with_capacity(table[0][0] as usize);
    while i < n && j < m {
        if a[i] == b[j] {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if table[i + 1][j] >= table[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// Aligns two unit sequences. Unmatched units of `a` are `Removed`,
/// unmatched units of `b` are `Added`; at each change point removals come
/// first.
///
/// The alignment is computed in a fixed orientation, so swapping the
/// arguments swaps `Added` and `Removed` exactly.
pub fn diff_units(a: &[String], b: &[String]) -> Vec<DiffSegment> {
    let pairs = if a <= b {
        lcs_pairs(a, b)
    } else {
        lcs_pairs(b, a).into_iter().map(|(j, i)| (i, j)).collect()
    };
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let emit = |out: &mut Vec<DiffSegment>, kind, units: &[String]| {
        out.extend(units.iter().map(|t| DiffSegment { kind, text: t.clone() }));
    };
    for (pi, pj) in pairs.into_iter().chain(std::iter::once((a.len(), b.len()))) {
        emit(&mut out, SegmentKind::Removed, &a[i..pi]);
        emit(&mut out, SegmentKind::Added, &b[j..pj]);
        if pi < a.len() {
            emit(&mut out, SegmentKind::Unchanged, &a[pi..=pi]);
        }
        i = pi + 1;
        j = pj + 1;
    }
    out
}
