//! Inference backends and completion parsing.
//!
//! [`HttpBackend`] speaks the chat-completions JSON shape; [`MockBackend`]
//! answers offline as a pure function of the prompt and a fixture id.
//! [`parse_prediction`] turns completion text back into a [`Prediction`].
//!
//! [`Prediction`]: crate::metrics::Prediction

mod config;
mod http;
mod mock;
mod parse;

pub use config::{BackendConfig, BackendKind, MockSettings};
pub use http::HttpBackend;
pub use mock::MockBackend;
pub use parse::{parse_prediction, parse_text, ParseRoute, Parsed};

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::prompts::PromptInstance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCompletion {
    pub text: String,
    pub latency_ms: u64,
    #[serde(default)]
    pub backend_meta: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
    #[error("environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("request timed out after {0} ms")]
    Timeout(u64),
    #[error("HTTP {status}: {body}")]
    HttpError { status: u16, body: String },
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("unparseable completion: {0}")]
    Unparseable(String),
}

pub trait Backend: Sync {
    fn complete(&self, prompt: &PromptInstance) -> Result<RawCompletion, GatewayError>;

    fn model_id(&self) -> &str;
}

/// Run `prompts` through `backend` with at most `max_concurrent` requests in
/// flight. Results come back in prompt order.
pub fn complete_all(
    backend: &dyn Backend,
    prompts: &[PromptInstance],
    max_concurrent: usize,
) -> Vec<Result<RawCompletion, GatewayError>> {
    let workers = max_concurrent.max(1).min(prompts.len());
    if workers <= 1 {
        return prompts.iter().map(|p| backend.complete(p)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RawCompletion, GatewayError>>>> =
        Mutex::new((0..prompts.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= prompts.len() {
                    break;
                }
                let r = backend.complete(&prompts[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect()
}

/// Build the backend a config asks for. `golds` feeds the mock backend and is
/// ignored by the HTTP backend.
pub fn backend_from_config(
    config: &BackendConfig,
    golds: BTreeMap<String, crate::metrics::Prediction>,
) -> Result<Box<dyn Backend>, GatewayError> {
    config.validate()?;
    Ok(match config.backend {
        BackendKind::Mock => Box::new(MockBackend::new(config, golds)),
        BackendKind::Http => Box::new(HttpBackend::new(config.clone())?),
    })
}
