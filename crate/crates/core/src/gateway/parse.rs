//! Completion text to [`Prediction`].
//!
//! Routes, tried in order:
//! 1. strict: the whole (trimmed) text is a JSON object with a
//!    `classification` key;
//! 2. embedded: the first balanced `{...}` substring that parses as such;
//! 3. labeled: a `Classification: self-harm | non self-harm` line, with any
//!    text after `Rationale:` (or else the rest of the completion) taken as
//!    the rationale.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{GatewayError, RawCompletion};
use crate::metrics::Prediction;
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseRoute {
    Strict,
    Embedded,
    Labeled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parsed {
    pub prediction: Prediction,
    pub route: ParseRoute,
}

pub fn parse_prediction(raw: &RawCompletion) -> Result<Parsed, GatewayError> {
    parse_text(&raw.text)
}

fn from_json(s: &str) -> Option<Prediction> {
    let v: serde_json::Value = serde_json::from_str(s).ok()?;
    let obj = v.as_object()?;
    if !obj.contains_key("classification") && !obj.contains_key("label") {
        return None;
    }
    serde_json::from_value(v).ok()
}

/// Byte ranges of balanced top-level `{...}` candidates, skipping braces
/// inside JSON strings.
fn object_candidates(s: &str) -> impl Iterator<Item = &str> {
    s.char_indices()
        .filter(|(_, c)| *c == '{')
        .filter_map(move |(start, _)| {
            let mut depth = 0usize;
            let mut in_str = false;
            let mut escaped = false;
            for (i, c) in s[start..].char_indices() {
                if in_str {
                    match c {
                        _ if escaped => escaped = false,
                        '\\' => escaped = true,
                        '"' => in_str = false,
                        _ => {}
                    }
                    continue;
                }
                match c {
                    '"' => in_str = true,
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(&s[start..start + i + 1]);
                        }
                    }
                    _ => {}
                }
            }
            None
        })
}

static LABEL_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)classification[*_\s]*:[*_\s]*\[?\s*(non[\s-]*self[\s-]*harm|self[\s-]*harm)").unwrap()
});
static RATIONALE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)rationale[*_\s]*:[*_\s]*").unwrap());

fn from_labeled(s: &str) -> Option<Prediction> {
    let caps = LABEL_LINE
        .captures_iter(s)
        .find(|c| !s[c.get(0).unwrap().end()..].trim_start().starts_with('/'))?;
    let word = caps.get(1).unwrap().as_str().to_lowercase();
    let label = if word.starts_with("non") {
        Label::NonSelfHarm
    } else {
        Label::SelfHarm
    };
    let rest = &s[caps.get(0).unwrap().end()..];
    let rationale = match RATIONALE.find(rest) {
        Some(m) => &rest[m.end()..],
        None => rest,
    };
    let mut p = Prediction::new(label);
    p.rationale = rationale.trim().trim_end_matches(['*', '_']).trim().to_string();
    Some(p)
}

pub fn parse_text(text: &str) -> Result<Parsed, GatewayError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(GatewayError::Unparseable("empty completion".into()));
    }
    if let Some(prediction) = from_json(trimmed) {
        return Ok(Parsed {
            prediction,
            route: ParseRoute::Strict,
        });
    }
    if let Some(prediction) = object_candidates(trimmed).find_map(from_json) {
        return Ok(Parsed {
            prediction,
            route: ParseRoute::Embedded,
        });
    }
    if let Some(prediction) = from_labeled(trimmed) {
        return Ok(Parsed {
            prediction,
            route: ParseRoute::Labeled,
        });
    }
    let preview: String = trimmed.chars().take(60).collect();
    Err(GatewayError::Unparseable(format!("no route matched {preview:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_json() {
        let t = r#"{"classification": "self-harm", "casual_mention_spans": [], "serious_intent_spans": ["thought about cutting again"]}"#;
        let p = parse_text(t).unwrap();
        assert_eq!(p.route, ParseRoute::Strict);
        assert_eq!(p.prediction.label, Label::SelfHarm);
        assert_eq!(p.prediction.si_spans, ["thought about cutting again"]);
    }

    #[test]
    fn embedded_json() {
        let t = "Sure! Here you go:\n```json\n{\"classification\": \"non self-harm\", \"casual_mention_spans\": [\"kill me {now}\"]}\n```";
        let p = parse_text(t).unwrap();
        assert_eq!(p.route, ParseRoute::Embedded);
        assert_eq!(p.prediction.label, Label::NonSelfHarm);
        assert_eq!(p.prediction.cm_spans, ["kill me {now}"]);
    }

    #[test]
    fn labeled_lines() {
        let p = parse_text("Classification: self-harm\nRationale: mentions cutting.").unwrap();
        assert_eq!(p.route, ParseRoute::Labeled);
        assert_eq!(p.prediction.label, Label::SelfHarm);
        assert_eq!(p.prediction.rationale, "mentions cutting.");
        let p = parse_text("**Classification**: Non Self-Harm\n**Rationale**: venting.").unwrap();
        assert_eq!(p.prediction.label, Label::NonSelfHarm);
        assert_eq!(p.prediction.rationale, "venting.");
    }

    #[test]
    fn template_echo_is_not_an_answer() {
        assert!(parse_text("Classification: [self-harm / non self-harm]").is_err());
        let p = parse_text("Classification: [self-harm / non self-harm]\nClassification: non self-harm").unwrap();
        assert_eq!(p.prediction.label, Label::NonSelfHarm);
    }

    #[test]
    fn unparseable() {
        assert!(matches!(parse_text("   "), Err(GatewayError::Unparseable(_))));
        assert!(matches!(
            parse_text("I cannot answer"),
            Err(GatewayError::Unparseable(_))
        ));
    }
}
