//! Chat sampling parameters and model name resolution.

use aigenie_core::{BackendError, BackendErrorKind};
use serde::{Deserialize, Serialize};

use crate::provider::Provider;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChatParams {
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub system_role: Option<String>,
    /// Responses requested per prompt.
    pub reps: usize,
    /// Provider default when absent (Anthropic requires one; see
    /// [`ANTHROPIC_DEFAULT_MAX_TOKENS`]).
    pub max_tokens: Option<u32>,
}

/// The messages API rejects requests without `max_tokens`.
pub const ANTHROPIC_DEFAULT_MAX_TOKENS: u32 = 4096;

impl Default for ChatParams {
    fn default() -> Self {
        Self {
            model: "gpt-4o".into(),
            temperature: 1.0,
            top_p: 1.0,
            system_role: None,
            reps: 1,
            max_tokens: None,
        }
    }
}

impl ChatParams {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |msg: String| Err(BackendError::new(BackendErrorKind::Input, msg));
        if self.model.trim().is_empty() {
            return bad("model must not be empty".into());
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return bad(format!("top_p must be in (0, 1], got {}", self.top_p));
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.max_tokens == Some(0) {
            return bad("max_tokens must be positive".into());
        }
        Ok(())
    }
}

/// Shorthand names accepted wherever a chat model is expected.
pub const ALIASES: &[(&str, Provider, &str)] = &[
    ("gpt4o", Provider::OpenAi, "gpt-4o"),
    ("chatgpt", Provider::OpenAi, "gpt-4o"),
    ("sonnet", Provider::Anthropic, "claude-sonnet-4-5"),
    ("opus", Provider::Anthropic, "claude-opus-4-6"),
    ("haiku", Provider::Anthropic, "claude-haiku-4-5"),
    ("claude", Provider::Anthropic, "claude-sonnet-4-5"),
    ("llama3", Provider::Groq, "llama-3.3-70b-versatile"),
    ("mixtral", Provider::Groq, "mixtral-8x7b-32768"),
    ("gemma", Provider::Groq, "gemma2-9b-it"),
    ("qwen", Provider::Groq, "qwen-2.5-72b"),
];

/// A model name after alias expansion, with the provider that serves it
/// when that can be told from the name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedModel {
    pub provider: Option<Provider>,
    pub id: String,
}

pub fn resolve_model(name: &str) -> ResolvedModel {
    let name = name.trim();
    let lower = name.to_ascii_lowercase();
    if let Some((_, provider, id)) = ALIASES.iter().find(|(alias, _, _)| *alias == lower) {
        return ResolvedModel {
            provider: Some(*provider),
            id: (*id).to_string(),
        };
    }
    ResolvedModel {
        provider: infer_provider(&lower),
        id: name.to_string(),
    }
}

fn infer_provider(lower: &str) -> Option<Provider> {
    const OPENAI: &[&str] = &["gpt-", "chatgpt-", "o1", "o3", "o4", "text-embedding-"];
    const GROQ: &[&str] = &["llama", "mixtral", "gemma", "qwen", "deepseek"];
    if OPENAI.iter().any(|p| lower.starts_with(p)) {
        Some(Provider::OpenAi)
    } else if lower.starts_with("claude") {
        Some(Provider::Anthropic)
    } else if lower.starts_with("jina-") {
        Some(Provider::Jina)
    } else if lower.contains('/') {
        Some(Provider::HuggingFace)
    } else if GROQ.iter().any(|p| lower.starts_with(p)) {
        Some(Provider::Groq)
    } else {
        None
    }
}
