//! Scoring a set of predictions into an [`EvalReport`].
//!
//! A sample whose completion could not be parsed is scored as a
//! misclassification (the opposite of its gold label), skipped by span and
//! rationale metrics, and counted under `unparseable`. Classification F1 is a
//! corpus-level quantity, so its `per_sample` holds the single value.
//! Rationale metrics compare the predicted rationale with the gold spans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    classification_f1, coherence, macro_f1, readability, relevance, semantic_similarity, span_set_score,
    EmbeddingProvider, MetricError, Normalization, Prediction,
};
use crate::util::{mean, population_variance};
use crate::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Population variance of `per_sample`.
    pub variance: f64,
    pub per_sample: Vec<f64>,
}

impl MetricSummary {
    pub fn from_samples(per_sample: Vec<f64>) -> MetricSummary {
        MetricSummary {
            mean: mean(&per_sample),
            variance: population_variance(&per_sample),
            per_sample,
        }
    }

    /// Mean and variance agree with `per_sample` within `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        (self.mean - mean(&self.per_sample)).abs() <= tol
            && (self.variance - population_variance(&self.per_sample)).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub model_id: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: BTreeMap<String, MetricSummary>,
    pub meta: RunMeta,
    #[serde(default)]
    pub counters: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

impl EvalReport {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.get(name)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Average {
    /// F1 of the self-harm class.
    #[default]
    Positive,
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub classification: bool,
    pub spans: bool,
    pub rationale: bool,
    pub average: F1Average,
    pub normalization: Normalization,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            classification: true,
            spans: true,
            rationale: true,
            average: F1Average::Positive,
            normalization: Normalization::default(),
        }
    }
}

/// One scored item: the gold answer and the parsed prediction, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub gold: Prediction,
    pub pred: Option<Prediction>,
}

pub fn evaluate(
    samples: &[Sample],
    opts: &EvalOptions,
    embedder: &dyn EmbeddingProvider,
    meta: RunMeta,
) -> Result<EvalReport, MetricError> {
    if samples.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut metrics = BTreeMap::new();
    let mut counters = BTreeMap::new();
    let parsed: Vec<(&Sample, &Prediction)> = samples.iter().filter_map(|s| s.pred.as_ref().map(|p| (s, p))).collect();
    counters.insert("samples".to_string(), samples.len() as u64);
    counters.insert("unparseable".to_string(), (samples.len() - parsed.len()) as u64);

    if opts.classification {
        let golds: Vec<Label> = samples.iter().map(|s| s.gold.label).collect();
        let preds: Vec<Label> = samples
            .iter()
            .map(|s| s.pred.as_ref().map_or(s.gold.label.flipped(), |p| p.label))
            .collect();
        let f1 = match opts.average {
            F1Average::Positive => classification_f1(&preds, &golds, Label::SelfHarm)?,
            F1Average::Macro => macro_f1(&preds, &golds)?,
        };
        metrics.insert("classification_f1".to_string(), MetricSummary::from_samples(vec![f1]));
        let acc = preds
            .iter()
            .zip(&golds)
            .map(|(p, g)| f64::from(u8::from(p == g)))
            .collect();
        metrics.insert("accuracy".to_string(), MetricSummary::from_samples(acc));
    }

    if opts.spans && !parsed.is_empty() {
        for (name, pick) in [
            (
                "cm_span_f1",
                (|p: &Prediction| &p.cm_spans) as fn(&Prediction) -> &Vec<String>,
            ),
            ("si_span_f1", |p: &Prediction| &p.si_spans),
        ] {
            let mut scores = Vec::with_capacity(parsed.len());
            let mut vacuous = 0u64;
            for (s, p) in &parsed {
                let sc = span_set_score(pick(p), pick(&s.gold), opts.normalization);
                vacuous += u64::from(sc.vacuous);
                scores.push(sc.score);
            }
            metrics.insert(name.to_string(), MetricSummary::from_samples(scores));
            counters.insert(format!("{name}_vacuous"), vacuous);
        }
    }

    if opts.rationale {
        let mut rel = Vec::new();
        let mut coh = Vec::new();
        let mut read = Vec::new();
        let mut grade = Vec::new();
        let mut sem = Vec::new();
        let mut empty = 0u64;
        for (s, p) in &parsed {
            let Ok(r) = readability(&p.rationale) else {
                empty += 1;
                continue;
            };
            let (cm, si) = (&s.gold.cm_spans, &s.gold.si_spans);
            rel.push(relevance(&p.rationale, cm, si));
            coh.push(coherence(&p.rationale, cm, si));
            read.push(r.normalized);
            grade.push(r.grade);
            sem.push(semantic_similarity(&p.rationale, cm, si, embedder)?);
        }
        counters.insert("rationale_missing".to_string(), empty);
        if !rel.is_empty() {
            metrics.insert("relevance".to_string(), MetricSummary::from_samples(rel));
            metrics.insert("coherence".to_string(), MetricSummary::from_samples(coh));
            metrics.insert("readability".to_string(), MetricSummary::from_samples(read));
            metrics.insert("readability_grade".to_string(), MetricSummary::from_samples(grade));
            metrics.insert("semantic_similarity".to_string(), MetricSummary::from_samples(sem));
        }
    }

    Ok(EvalReport {
        metrics,
        meta,
        counters,
        manifest: None,
    })
}
