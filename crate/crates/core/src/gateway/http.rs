//! Chat-completions client.
//!
//! Requests carry `model`, a single user message holding the rendered
//! prompt, `temperature` and `max_tokens`. The completion text is read from
//! `choices[0].message.content` (or `choices[0].text`). Connection failures,
//! timeouts, 429 and 5xx responses are retried with exponential backoff;
//! other 4xx responses fail immediately.

use std::collections::BTreeMap;
use std::env;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use ureq::Agent;

use super::{Backend, BackendConfig, GatewayError, RawCompletion};
use crate::prompts::PromptInstance;

pub struct HttpBackend {
    config: BackendConfig,
    agent: Agent,
    api_key: Option<String>,
}

enum Failure {
    Transient { reason: String, timed_out: bool },
    Fatal(GatewayError),
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<HttpBackend, GatewayError> {
        config.validate()?;
        let api_key = match &config.api_key_env {
            Some(var) => Some(env::var(var).map_err(|_| GatewayError::MissingApiKey(var.clone()))?),
            None => None,
        };
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpBackend { config, agent, api_key })
    }

    fn attempt(&self, body: &Value) -> Result<String, Failure> {
        let mut req = self.agent.post(&self.config.endpoint_url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => {
                return Err(Failure::Transient {
                    reason: "timeout".into(),
                    timed_out: true,
                })
            }
            Err(e @ (ureq::Error::Io(_) | ureq::Error::ConnectionFailed)) => {
                return Err(Failure::Transient {
                    reason: e.to_string(),
                    timed_out: false,
                })
            }
            Err(e) => return Err(Failure::Fatal(GatewayError::Transport(e.to_string()))),
        };
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().unwrap_or_default();
        if status == 429 || status >= 500 {
            return Err(Failure::Transient {
                reason: format!("HTTP {status}"),
                timed_out: false,
            });
        }
        if !(200..300).contains(&status) {
            return Err(Failure::Fatal(GatewayError::HttpError { status, body: text }));
        }
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Fatal(GatewayError::BadResponse(format!("not JSON: {e}"))))?;
        let choice = &v["choices"][0];
        choice["message"]["content"]
            .as_str()
            .or_else(|| choice["text"].as_str())
            .map(str::to_string)
            .ok_or_else(|| Failure::Fatal(GatewayError::BadResponse("no choices[0] content".into())))
    }
}

impl Backend for HttpBackend {
    fn complete(&self, prompt: &PromptInstance) -> Result<RawCompletion, GatewayError> {
        let body = json!({
            "model": self.config.model_id,
            "messages": [{ "role": "user", "content": prompt.render() }],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        });
        let started = Instant::now();
        let attempts = self.config.max_retries + 1;
        let mut last = String::new();
        let mut last_timed_out = false;
        for attempt in 0..attempts {
            if attempt > 0 {
                let delay = self.config.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                thread::sleep(Duration::from_millis(delay));
            }
            match self.attempt(&body) {
                Ok(text) => {
                    let mut backend_meta = BTreeMap::new();
                    backend_meta.insert("backend".into(), "http".into());
                    backend_meta.insert("attempts".into(), (attempt + 1).into());
                    return Ok(RawCompletion {
                        text,
                        latency_ms: started.elapsed().as_millis() as u64,
                        backend_meta,
                    });
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Transient { reason, timed_out }) => {
                    log::warn!("attempt {} of {attempts} failed: {reason}", attempt + 1);
                    last = reason;
                    last_timed_out = timed_out;
                }
            }
        }
        if last_timed_out && attempts == 1 {
            return Err(GatewayError::Timeout((self.config.timeout_secs * 1000.0) as u64));
        }
        Err(GatewayError::RetriesExhausted { attempts, last })
    }

    fn model_id(&self) -> &str {
        &self.config.model_id
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Post;
    use crate::gateway::BackendKind;
    use crate::prompts::build_zeroshot;
    use crate::Label;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    /// Serves one canned response per connection, in order.
    fn serve(responses: Vec<(u16, &'static str)>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        format!("http://{addr}/v1/chat/completions")
    }

    fn config(url: String, retries: u32) -> BackendConfig {
        BackendConfig {
            backend: BackendKind::Http,
            endpoint_url: url,
            model_id: "m".into(),
            max_retries: retries,
            backoff_ms: 1,
            timeout_secs: 5.0,
            ..BackendConfig::default()
        }
    }

    fn prompt() -> PromptInstance {
        build_zeroshot(&Post::new("a", "tired", Label::SelfHarm)).unwrap()
    }

    const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"Classification: self-harm"}}]}"#;

    #[test]
    fn retries_then_succeeds() {
        let url = serve(vec![(500, "{}"), (200, OK)]);
        let b = HttpBackend::new(config(url, 1)).unwrap();
        let r = b.complete(&prompt()).unwrap();
        assert_eq!(r.text, "Classification: self-harm");
        assert_eq!(r.backend_meta["attempts"], 2);
    }

    #[test]
    fn persistent_500_exhausts() {
        let url = serve(vec![(500, "{}")]);
        let b = HttpBackend::new(config(url, 0)).unwrap();
        assert!(matches!(
            b.complete(&prompt()),
            Err(GatewayError::RetriesExhausted { attempts: 1, .. })
        ));
    }

    #[test]
    fn client_error_is_not_retried() {
        let url = serve(vec![(401, "nope")]);
        let b = HttpBackend::new(config(url, 3)).unwrap();
        assert!(matches!(
            b.complete(&prompt()),
            Err(GatewayError::HttpError { status: 401, .. })
        ));
    }

    #[test]
    fn missing_key_env() {
        let mut c = config("http://127.0.0.1:9".into(), 0);
        c.api_key_env = Some("EMOGUARD_TEST_SURELY_UNSET_KEY".into());
        assert!(matches!(HttpBackend::new(c), Err(GatewayError::MissingApiKey(_))));
    }
}
