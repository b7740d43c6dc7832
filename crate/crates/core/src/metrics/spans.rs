//! Bag-of-tokens span overlap.
//!
//! Text is lowercased, punctuation (ASCII punctuation and every Unicode `P*`
//! character) is removed, and the remainder is split on whitespace. English
//! articles are kept unless [`Normalization::remove_articles`] is set.

use std::collections::HashMap;

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Normalization {
    pub remove_articles: bool,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || c.general_category_group() == GeneralCategoryGroup::Punctuation
}

pub fn normalize_tokens(text: &str, norm: Normalization) -> Vec<String> {
    let cleaned: String = text.to_lowercase().chars().filter(|c| !is_punct(*c)).collect();
    cleaned
        .split_whitespace()
        .filter(|t| !(norm.remove_articles && matches!(*t, "a" | "an" | "the")))
        .map(str::to_string)
        .collect()
}

fn overlap_f1(pred: &[String], gold: &[String]) -> f64 {
    match (pred.is_empty(), gold.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in gold {
        *counts.entry(t).or_default() += 1;
    }
    let mut overlap = 0usize;
    for t in pred {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / pred.len() as f64;
    let r = overlap as f64 / gold.len() as f64;
    2.0 * p * r / (p + r)
}

/// Token-overlap F1 under the default normalization.
pub fn token_f1(pred: &str, gold: &str) -> f64 {
    token_f1_with(pred, gold, Normalization::default())
}

pub fn token_f1_with(pred: &str, gold: &str, norm: Normalization) -> f64 {
    overlap_f1(&normalize_tokens(pred, norm), &normalize_tokens(gold, norm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanScore {
    pub score: f64,
    /// Both sides were empty; the score of 1 reflects agreement on absence.
    pub vacuous: bool,
}

/// Each predicted span takes its best token F1 against any gold span; the
/// sample score is the mean over predicted spans.
pub fn span_set_score<P: AsRef<str>, G: AsRef<str>>(preds: &[P], golds: &[G], norm: Normalization) -> SpanScore {
    match (preds.is_empty(), golds.is_empty()) {
        (true, true) => {
            return SpanScore {
                score: 1.0,
                vacuous: true,
            }
        }
        (true, false) | (false, true) => {
            return SpanScore {
                score: 0.0,
                vacuous: false,
            }
        }
        _ => {}
    }
    let golds: Vec<Vec<String>> = golds.iter().map(|g| normalize_tokens(g.as_ref(), norm)).collect();
    let mut sum = 0.0;
    for p in preds {
        let p = normalize_tokens(p.as_ref(), norm);
        let mut best: f64 = 0.0;
        for g in &golds {
            best = best.max(overlap_f1(&p, g));
        }
        sum += best;
    }
    SpanScore {
        score: sum / preds.len() as f64,
        vacuous: false,
    }
}

pub fn span_set_f1<P: AsRef<str>, G: AsRef<str>>(preds: &[P], golds: &[G]) -> f64 {
    span_set_score(preds, golds, Normalization::default()).score
}
