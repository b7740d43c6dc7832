//! Evaluation measures: classification F1, span-overlap F1, rationale
//! metrics (relevance, coherence, readability, semantic similarity) and the
//! paired t-test.

mod classification;
mod embed;
mod rationale;
mod report;
mod spans;
mod ttest;

pub use classification::{classification_f1, confusion, macro_f1, Confusion};
pub use embed::{cosine, semantic_similarity, EmbedError, EmbeddingProvider, HashingEmbedder};
pub use rationale::{coherence, readability, relevance, tfidf_tokens, Readability};
pub use report::{evaluate, EvalOptions, EvalReport, F1Average, MetricSummary, RunMeta, Sample};
pub use spans::{normalize_tokens, span_set_f1, span_set_score, token_f1, token_f1_with, Normalization, SpanScore};
pub use ttest::{paired_t_test, student_t_sf, TTest};

use serde::{Deserialize, Serialize};

use crate::Label;

/// A model's answer for one post, in the fine-tuning output schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    #[serde(rename = "classification", alias = "label")]
    pub label: Label,
    #[serde(rename = "casual_mention_spans", alias = "cm_spans", default)]
    pub cm_spans: Vec<String>,
    #[serde(rename = "serious_intent_spans", alias = "si_spans", default)]
    pub si_spans: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub rationale: String,
}

impl Prediction {
    pub fn new(label: Label) -> Prediction {
        Prediction {
            label,
            cm_spans: Vec::new(),
            si_spans: Vec::new(),
            rationale: String::new(),
        }
    }

    /// Gold answer for an annotated post; span texts only.
    pub fn from_post(post: &crate::corpus::Post) -> Prediction {
        Prediction {
            label: post.label,
            cm_spans: post.cm_spans.iter().map(|s| s.text.clone()).collect(),
            si_spans: post.si_spans.iter().map(|s| s.text.clone()).collect(),
            rationale: String::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("text has no words")]
    EmptyText,
    #[error("need at least 2 paired samples, got {0}")]
    TooFew(usize),
    #[error("all paired differences are equal; t is undefined")]
    ZeroVariance,
    #[error("embedding {context}: {source}")]
    EmbedderFailure {
        context: String,
        #[source]
        source: EmbedError,
    },
}
