//! Deterministic offline backend.
//!
//! The answer for a prompt is drawn from a generator seeded with
//! `sha256(fixture_id || 0x00 || rendered prompt)`. With probability
//! `accuracy` the gold label is returned, otherwise the opposite one. Gold
//! comes from the supplied map (by prompt id), else from the prompt's own
//! expected output, else from the seed.

use std::collections::BTreeMap;

use rand::Rng;
use sha2::{Digest, Sha256};

use super::{Backend, BackendConfig, GatewayError, MockSettings, RawCompletion};
use crate::metrics::Prediction;
use crate::prompts::{PromptInstance, PromptMode};
use crate::util::{seeded_rng, SeededRng};
use crate::Label;

pub struct MockBackend {
    settings: MockSettings,
    model_id: String,
    golds: BTreeMap<String, Prediction>,
}

impl MockBackend {
    pub fn new(config: &BackendConfig, golds: BTreeMap<String, Prediction>) -> MockBackend {
        MockBackend {
            settings: config.mock.clone(),
            model_id: config.model_id.clone(),
            golds,
        }
    }

    fn rng_for(&self, prompt: &PromptInstance) -> SeededRng {
        let mut h = Sha256::new();
        h.update(self.settings.fixture_id.as_bytes());
        h.update([0u8]);
        h.update(prompt.render().as_bytes());
        let digest = h.finalize();
        seeded_rng(u64::from_le_bytes(digest[..8].try_into().unwrap()))
    }

    fn answer(&self, prompt: &PromptInstance, rng: &mut SeededRng) -> Prediction {
        let gold = prompt
            .id
            .as_ref()
            .and_then(|id| self.golds.get(id))
            .or(prompt.output.as_ref())
            .cloned()
            .unwrap_or_else(|| {
                Prediction::new(if rng.random_bool(0.5) {
                    Label::SelfHarm
                } else {
                    Label::NonSelfHarm
                })
            });
        let mut p = gold;
        if !rng.random_bool(self.settings.accuracy) {
            p.label = p.label.flipped();
        }
        for spans in [&mut p.cm_spans, &mut p.si_spans] {
            for s in spans.iter_mut() {
                if !rng.random_bool(self.settings.accuracy) {
                    // Drop the last word to simulate a boundary error.
                    if let Some(cut) = s.trim_end().rfind(char::is_whitespace) {
                        s.truncate(cut);
                    }
                }
            }
        }
        p.rationale = rationale_for(&p);
        p
    }
}

fn rationale_for(p: &Prediction) -> String {
    let quoted: Vec<String> = p
        .si_spans
        .iter()
        .chain(&p.cm_spans)
        .map(|s| format!("\"{s}\""))
        .collect();
    match (p.label, quoted.is_empty()) {
        (Label::SelfHarm, false) => format!(
            "The post is classified as self-harm. The phrases {} point to genuine intent to hurt oneself.",
            quoted.join(" and ")
        ),
        (Label::SelfHarm, true) => {
            "The post is classified as self-harm. Its tone and content describe real distress.".to_string()
        }
        (Label::NonSelfHarm, false) => format!(
            "The post is classified as non self-harm. The phrases {} are used casually to vent frustration.",
            quoted.join(" and ")
        ),
        (Label::NonSelfHarm, true) => {
            "The post is classified as non self-harm. It lacks any direct mention of self-harm.".to_string()
        }
    }
}

impl Backend for MockBackend {
    fn complete(&self, prompt: &PromptInstance) -> Result<RawCompletion, GatewayError> {
        let mut rng = self.rng_for(prompt);
        let text = if rng.random_bool(self.settings.malformed_rate) {
            "I'm not able to help with that.".to_string()
        } else {
            let p = self.answer(prompt, &mut rng);
            match prompt.mode {
                PromptMode::FineTune => {
                    let spans_only = Prediction {
                        rationale: String::new(),
                        ..p
                    };
                    serde_json::to_string(&spans_only).expect("prediction serializes")
                }
                PromptMode::Rationale => p.rationale,
                PromptMode::ZeroShot | PromptMode::FewShot => {
                    format!("Classification: {}\nRationale: {}", p.label.as_prose(), p.rationale)
                }
                PromptMode::Synthetic => format!(
                    "Honestly some days are harder than others. Sample {}.",
                    rng.random_range(0..10_000u32)
                ),
            }
        };
        let mut backend_meta = BTreeMap::new();
        backend_meta.insert("backend".into(), "mock".into());
        backend_meta.insert("fixture_id".into(), self.settings.fixture_id.clone().into());
        Ok(RawCompletion {
            text,
            latency_ms: 0,
            backend_meta,
        })
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }
}
