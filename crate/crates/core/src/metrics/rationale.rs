//! Rationale quality against the spans the rationale should explain.
//!
//! * relevance: 1 when every span occurs (case-insensitively) in the
//!   rationale, else 0.
//! * coherence: cosine of TF-IDF vectors for the joined spans and the
//!   rationale. Tokens are lowercase runs of two or more word characters;
//!   tf is the raw count, `idf = ln((1 + N) / (1 + df)) + 1` with `N = 2`,
//!   vectors are L2-normalised.
//! * readability: Flesch-Kincaid grade. Sentences end at `.`, `!` or `?`
//!   followed by whitespace or end of text; words are whitespace tokens with
//!   at least one alphanumeric character; syllables are vowel groups
//!   (`aeiouy`) less a silent trailing `e`, at least one per word. The grade
//!   maps to `[0, 1]` as `clamp((18 - grade) / 18, 0, 1)`.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::MetricError;

fn joined_spans(cm_spans: &[String], si_spans: &[String]) -> String {
    cm_spans
        .iter()
        .chain(si_spans)
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn relevance(rationale: &str, cm_spans: &[String], si_spans: &[String]) -> f64 {
    let r = rationale.to_lowercase();
    let all = cm_spans.iter().chain(si_spans).all(|s| r.contains(&s.to_lowercase()));
    if all {
        1.0
    } else {
        0.0
    }
}

static TFIDF_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b\w\w+\b").unwrap());

pub fn tfidf_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    TFIDF_TOKEN.find_iter(&lower).map(|m| m.as_str().to_string()).collect()
}

pub fn coherence(rationale: &str, cm_spans: &[String], si_spans: &[String]) -> f64 {
    let docs = [tfidf_tokens(&joined_spans(cm_spans, si_spans)), tfidf_tokens(rationale)];
    if docs.iter().any(Vec::is_empty) {
        return 0.0;
    }
    let mut tf: BTreeMap<&str, [f64; 2]> = BTreeMap::new();
    for (d, tokens) in docs.iter().enumerate() {
        for t in tokens {
            tf.entry(t).or_default()[d] += 1.0;
        }
    }
    let n = docs.len() as f64;
    let mut dot = 0.0;
    let mut norms = [0.0; 2];
    for counts in tf.values() {
        let df = counts.iter().filter(|c| **c > 0.0).count() as f64;
        let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
        let w = [counts[0] * idf, counts[1] * idf];
        dot += w[0] * w[1];
        norms[0] += w[0] * w[0];
        norms[1] += w[1] * w[1];
    }
    (dot / (norms[0].sqrt() * norms[1].sqrt())).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readability {
    pub grade: f64,
    pub normalized: f64,
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
}

static SENTENCE_END: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[.!?]+(\s+|$)").unwrap());

fn syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0usize;
    let mut prev = false;
    for &c in &letters {
        let v = vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    if letters.last() == Some(&'e') {
        groups = groups.saturating_sub(1);
    }
    groups.max(1)
}

pub fn readability(text: &str) -> Result<Readability, MetricError> {
    let is_word = |w: &&str| w.chars().any(char::is_alphanumeric);
    let words: Vec<&str> = text.split_whitespace().filter(is_word).collect();
    if words.is_empty() {
        return Err(MetricError::EmptyText);
    }
    let sentences = SENTENCE_END
        .split(text)
        .filter(|s| s.split_whitespace().any(|w| is_word(&w)))
        .count()
        .max(1);
    let syl: usize = words.iter().map(|w| syllables(w)).sum();
    let wc = words.len() as f64;
    let grade = 0.39 * (wc / sentences as f64) + 11.8 * (syl as f64 / wc) - 15.59;
    Ok(Readability {
        grade,
        normalized: ((18.0 - grade) / 18.0).clamp(0.0, 1.0),
        words: words.len(),
        sentences,
        syllables: syl,
    })
}
