use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};

/// Sampling and retry protocol shared by every model in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    pub temperature: f64,
    pub max_tokens: u32,
    pub reasoning_effort: String,
    pub max_attempts: u32,
    pub attempt_timeout_secs: f64,
    /// First retry waits up to this long; each later retry doubles the cap.
    pub backoff_base_secs: f64,
    pub backoff_factor: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            temperature: 0.0,
            max_tokens: 3000,
            reasoning_effort: "low".into(),
            max_attempts: 3,
            attempt_timeout_secs: 120.0,
            backoff_base_secs: 1.0,
            backoff_factor: 2.0,
        }
    }
}

impl InferenceConfig {
    pub fn attempt_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.attempt_timeout_secs)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::InvalidArgument(m.into()));
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be finite and >= 0");
        }
        if self.max_tokens == 0 {
            return bad("max_tokens must be positive");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        if !(self.attempt_timeout_secs.is_finite() && self.attempt_timeout_secs > 0.0) {
            return bad("attempt timeout must be positive");
        }
        if !(self.backoff_base_secs.is_finite() && self.backoff_base_secs >= 0.0) {
            return bad("backoff base must be >= 0");
        }
        if !(self.backoff_factor.is_finite() && self.backoff_factor >= 1.0) {
            return bad("backoff factor must be >= 1");
        }
        Ok(())
    }

    /// Names of fields that differ from the protocol defaults.
    pub fn overrides(&self) -> Vec<&'static str> {
        let d = InferenceConfig::default();
        let mut out = Vec::new();
        if self.temperature != d.temperature {
            out.push("temperature");
        }
        if self.max_tokens != d.max_tokens {
            out.push("max_tokens");
        }
        if self.reasoning_effort != d.reasoning_effort {
            out.push("reasoning_effort");
        }
        if self.max_attempts != d.max_attempts {
            out.push("max_attempts");
        }
        if self.attempt_timeout_secs != d.attempt_timeout_secs {
            out.push("attempt_timeout_secs");
        }
        if self.backoff_base_secs != d.backoff_base_secs {
            out.push("backoff_base_secs");
        }
        if self.backoff_factor != d.backoff_factor {
            out.push("backoff_factor");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_defaults() {
        let c = InferenceConfig::default();
        assert_eq!(c.temperature, 0.0);
        assert_eq!(c.max_tokens, 3000);
        assert_eq!(c.reasoning_effort, "low");
        assert_eq!(c.max_attempts, 3);
        assert_eq!(c.attempt_timeout(), Duration::from_secs(120));
        assert!(c.overrides().is_empty());
        c.validate().unwrap();
    }

    #[test]
    fn overrides_are_named() {
        let c = InferenceConfig { max_attempts: 5, ..Default::default() };
        assert_eq!(c.overrides(), vec!["max_attempts"]);
        let c = InferenceConfig { max_attempts: 0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: InferenceConfig = serde_json::from_str(r#"{"max_tokens":10}"#).unwrap();
        assert_eq!(c.max_tokens, 10);
        assert_eq!(c.max_attempts, 3);
    }
}
