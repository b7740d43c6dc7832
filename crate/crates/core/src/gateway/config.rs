use serde::{Deserialize, Serialize};

use super::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

/// Behaviour of the offline backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockSettings {
    pub fixture_id: String,
    /// Probability of returning the gold label.
    pub accuracy: f64,
    /// Probability of returning text no parser route accepts.
    pub malformed_rate: f64,
}

impl Default for MockSettings {
    fn default() -> Self {
        MockSettings {
            fixture_id: "default".into(),
            accuracy: 0.85,
            malformed_rate: 0.0,
        }
    }
}

/// Defaults (temperature 0, 512 max tokens) are local choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub backend: BackendKind,
    pub endpoint_url: String,
    pub model_id: String,
    pub api_key_env: Option<String>,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub max_concurrent: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    /// First retry delay; doubles on each further attempt.
    pub backoff_ms: u64,
    pub mock: MockSettings,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            backend: BackendKind::Mock,
            endpoint_url: String::new(),
            model_id: "mock".into(),
            api_key_env: None,
            timeout_secs: 60.0,
            max_retries: 3,
            max_concurrent: 4,
            temperature: 0.0,
            max_tokens: 512,
            backoff_ms: 250,
            mock: MockSettings::default(),
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        let bad = |m: String| Err(GatewayError::InvalidConfig(m));
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad(format!("timeout_secs must be > 0, got {}", self.timeout_secs));
        }
        if self.max_concurrent < 1 {
            return bad("max_concurrent must be at least 1".into());
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return bad(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !(0.0..=1.0).contains(&self.mock.accuracy) || !(0.0..=1.0).contains(&self.mock.malformed_rate) {
            return bad("mock accuracy and malformed_rate must lie in [0, 1]".into());
        }
        if self.backend == BackendKind::Http && self.endpoint_url.trim().is_empty() {
            return bad("http backend needs endpoint_url".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c: BackendConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, BackendConfig::default());
        assert_eq!((c.temperature, c.max_tokens), (0.0, 512));
        c.validate().unwrap();
        let bad: BackendConfig = serde_json::from_str(r#"{"timeout_secs": 0}"#).unwrap();
        assert!(bad.validate().is_err());
        let bad: BackendConfig = serde_json::from_str(r#"{"max_concurrent": 0}"#).unwrap();
        assert!(bad.validate().is_err());
        let bad: BackendConfig = serde_json::from_str(r#"{"backend": "http"}"#).unwrap();
        assert!(bad.validate().is_err());
    }
}
