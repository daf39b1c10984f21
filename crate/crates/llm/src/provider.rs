//! Provider identities, credentials and per-provider client settings.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use aigenie_core::{BackendError, BackendErrorKind};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    #[serde(rename = "openai")]
    OpenAi,
    Anthropic,
    Groq,
    Jina,
    #[serde(rename = "huggingface")]
    HuggingFace,
}

/// Which of the two wire formats a provider speaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireFormat {
    OpenAiCompatible,
    AnthropicMessages,
}

impl Provider {
    pub const ALL: [Provider; 5] = [
        Provider::OpenAi,
        Provider::Anthropic,
        Provider::Groq,
        Provider::Jina,
        Provider::HuggingFace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Provider::OpenAi => "openai",
            Provider::Anthropic => "anthropic",
            Provider::Groq => "groq",
            Provider::Jina => "jina",
            Provider::HuggingFace => "huggingface",
        }
    }

    pub fn default_base_url(self) -> &'static str {
        match self {
            Provider::OpenAi => "https://api.openai.com/v1",
            Provider::Anthropic => "https://api.anthropic.com/v1",
            Provider::Groq => "https://api.groq.com/openai/v1",
            Provider::Jina => "https://api.jina.ai/v1",
            Provider::HuggingFace => "https://router.huggingface.co/v1",
        }
    }

    /// Environment variable consulted when the config carries no key.
    pub fn key_env_var(self) -> &'static str {
        match self {
            Provider::OpenAi => "OPENAI_API_KEY",
            Provider::Anthropic => "ANTHROPIC_API_KEY",
            Provider::Groq => "GROQ_API_KEY",
            Provider::Jina => "JINA_API_KEY",
            Provider::HuggingFace => "HF_TOKEN",
        }
    }

    pub fn wire_format(self) -> WireFormat {
        match self {
            Provider::Anthropic => WireFormat::AnthropicMessages,
            _ => WireFormat::OpenAiCompatible,
        }
    }

    /// Texts per embedding request when the config does not say otherwise.
    pub fn default_embed_batch(self) -> usize {
        match self {
            Provider::OpenAi => 2048,
            Provider::Jina => 512,
            Provider::Groq => 128,
            Provider::HuggingFace => 64,
            Provider::Anthropic => 1,
        }
    }

    pub fn supports_embeddings(self) -> bool {
        self != Provider::Anthropic
    }
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provider {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "openai" => Ok(Provider::OpenAi),
            "anthropic" => Ok(Provider::Anthropic),
            "groq" => Ok(Provider::Groq),
            "jina" => Ok(Provider::Jina),
            "huggingface" | "hf" => Ok(Provider::HuggingFace),
            other => Err(BackendError::new(
                BackendErrorKind::Config,
                format!("unknown provider `{other}` (expected openai, anthropic, groq, jina or huggingface)"),
            )),
        }
    }
}

/// An API key. Debug and serialized forms are redacted, so a config can be
/// logged or written out without leaking it.
#[derive(Clone, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    /// Replace every occurrence of the key in `text`.
    pub fn redact(&self, text: &str) -> String {
        if self.0.is_empty() {
            text.to_string()
        } else {
            text.replace(&self.0, "[redacted]")
        }
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret([redacted])")
    }
}

impl Serialize for Secret {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str("[redacted]")
    }
}

impl<'de> Deserialize<'de> for Secret {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer).map(Secret)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Total attempts per request, the first one included.
    pub max_attempts: u32,
    /// Delay before the first retry; doubles on every further retry.
    pub backoff_base_ms: u64,
    /// Add up to one base interval of random delay to each wait.
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            backoff_base_ms: 1000,
            jitter: true,
        }
    }
}

impl RetryPolicy {
    /// Wait before attempt `attempt + 1`, where `attempt` counts from 1.
    pub fn delay(&self, attempt: u32) -> Duration {
        let base = self.backoff_base_ms;
        let exp = base.saturating_mul(1u64 << (attempt.saturating_sub(1)).min(20));
        let jitter = if self.jitter && base > 0 {
            rand::random_range(0..base)
        } else {
            0
        };
        Duration::from_millis(exp.saturating_add(jitter))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub provider: Provider,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key: Option<Secret>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub retry: RetryPolicy,
    /// Texts per embedding request; provider default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed_batch: Option<usize>,
    /// Per-request timeout in seconds.
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_in_flight() -> usize {
    4
}

fn default_timeout() -> u64 {
    120
}

impl ProviderConfig {
    pub fn new(provider: Provider) -> Self {
        Self {
            provider,
            api_key: None,
            base_url: None,
            max_in_flight: default_in_flight(),
            retry: RetryPolicy::default(),
            embed_batch: None,
            timeout_secs: default_timeout(),
        }
    }

    pub fn with_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(Secret::new(key));
        self
    }

    pub fn with_base_url(mut self, url: impl Into<String>) -> Self {
        self.base_url = Some(url.into());
        self
    }

    pub fn base_url(&self) -> &str {
        self.base_url
            .as_deref()
            .unwrap_or(self.provider.default_base_url())
            .trim_end_matches('/')
    }

    pub fn embed_batch(&self) -> usize {
        self.embed_batch.unwrap_or(self.provider.default_embed_batch()).max(1)
    }

    /// The configured key, else the provider's environment variable.
    pub fn resolve_key(&self) -> Option<Secret> {
        self.api_key.clone().filter(|k| !k.expose().is_empty()).or_else(|| {
            std::env::var(self.provider.key_env_var())
                .ok()
                .filter(|v| !v.trim().is_empty())
                .map(|v| Secret::new(v.trim()))
        })
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |msg: String| Err(BackendError::new(BackendErrorKind::Config, msg));
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be at least 1".into());
        }
        if self.retry.max_attempts == 0 {
            return bad("retry.max_attempts must be at least 1".into());
        }
        if let Some(url) = &self.base_url {
            if !(url.starts_with("http://") || url.starts_with("https://")) {
                return bad(format!("base_url `{url}` must start with http:// or https://"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secret_never_prints() {
        let cfg = ProviderConfig::new(Provider::OpenAi).with_key("sk-abc123");
        assert!(!format!("{cfg:?}").contains("sk-abc123"));
        assert!(!serde_json::to_string(&cfg).unwrap().contains("sk-abc123"));
    }

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy {
            max_attempts: 5,
            backoff_base_ms: 1000,
            jitter: false,
        };
        let d: Vec<u64> = (1..5).map(|a| p.delay(a).as_millis() as u64).collect();
        assert_eq!(d, [1000, 2000, 4000, 8000]);
        let j = RetryPolicy { jitter: true, ..p };
        let ms = j.delay(2).as_millis();
        assert!((2000..3000).contains(&ms));
    }

    #[test]
    fn provider_names_round_trip() {
        for p in Provider::ALL {
            assert_eq!(p.as_str().parse::<Provider>().unwrap(), p);
        }
        assert_eq!(Provider::from_str("HF").unwrap(), Provider::HuggingFace);
        assert!("mistral".parse::<Provider>().is_err());
    }

    #[test]
    fn base_url_override_trims_slash() {
        let cfg = ProviderConfig::new(Provider::Groq).with_base_url("http://127.0.0.1:9/v1/");
        assert_eq!(cfg.base_url(), "http://127.0.0.1:9/v1");
        assert_eq!(ProviderConfig::new(Provider::Jina).base_url(), "https://api.jina.ai/v1");
    }
}
