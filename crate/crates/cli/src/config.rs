//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! out = "results"
//!
//! [generation]
//! target_n = 60
//! [generation.attributes]
//! openness = ["creative", "curious"]
//!
//! [pipeline]
//! ega_model = "auto"
//!
//! [chat]
//! model = "gpt-4o"
//!
//! [embedding]
//! model = "text-embedding-3-small"
//!
//! [providers.openai]
//! api_key = "${OPENAI_API_KEY}"
//! ```
//!
//! `${NAME}` is expanded from the environment in `api_key` values only.

use std::path::{Path, PathBuf};

use aigenie_core::prompt::GenerationSpec;
use aigenie_core::PipelineOptions;
use aigenie_llm::{ChatParams, Provider, ProviderConfig, Secret};
use indexmap::IndexMap;
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_EMBEDDING_MODEL: &str = "text-embedding-3-small";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSettings {
    pub model: Option<String>,
    pub provider: Option<Provider>,
}

/// `[chat]`: the chat parameters plus an optional explicit provider.
#[derive(Debug, Clone, Default, Deserialize)]
struct ChatSection {
    provider: Option<Provider>,
    #[serde(flatten)]
    params: ChatParams,
}

/// Provider table as written in the file; `provider` comes from the key.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProviderEntry {
    api_key: Option<String>,
    base_url: Option<String>,
    max_in_flight: Option<usize>,
    retry: Option<aigenie_llm::RetryPolicy>,
    embed_batch: Option<usize>,
    timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    generation: Option<GenerationSpec>,
    #[serde(default)]
    pipeline: PipelineOptions,
    chat: Option<ChatSection>,
    #[serde(default)]
    embedding: EmbeddingSettings,
    #[serde(default)]
    providers: IndexMap<String, ProviderEntry>,
}

/// A parsed and validated configuration.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub generation: Option<GenerationSpec>,
    pub pipeline: PipelineOptions,
    pub chat: Option<ChatParams>,
    pub chat_provider: Option<Provider>,
    pub embedding: EmbeddingSettings,
    pub providers: Vec<ProviderConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, |name| std::env::var(name).ok())
    }

    /// Parse and validate; `env` resolves `${NAME}` in API keys.
    pub fn parse(text: &str, env: impl Fn(&str) -> Option<String>) -> Result<Self, CliError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
        let mut providers = Vec::new();
        for (name, entry) in raw.providers {
            let provider: Provider = name.parse().map_err(|e: aigenie_core::BackendError| {
                CliError::Validation(e.message)
            })?;
            let mut cfg = ProviderConfig::new(provider);
            if let Some(key) = entry.api_key {
                cfg.api_key = Some(Secret::new(interpolate(&key, &env)?));
            }
            cfg.base_url = entry.base_url;
            if let Some(n) = entry.max_in_flight {
                cfg.max_in_flight = n;
            }
            if let Some(r) = entry.retry {
                cfg.retry = r;
            }
            cfg.embed_batch = entry.embed_batch;
            if let Some(t) = entry.timeout_secs {
                cfg.timeout_secs = t;
            }
            cfg.validate().map_err(|e| CliError::Validation(format!("[providers.{name}] {}", e.message)))?;
            providers.push(cfg);
        }
        let config = Self {
            seed: raw.seed,
            out: raw.out,
            generation: raw.generation,
            pipeline: raw.pipeline,
            chat_provider: raw.chat.as_ref().and_then(|c| c.provider),
            chat: raw.chat.map(|c| c.params),
            embedding: raw.embedding,
            providers,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.pipeline.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        if let Some(chat) = &self.chat {
            chat.validate().map_err(|e| CliError::Validation(e.message))?;
        }
        if let Some(spec) = &self.generation {
            let violations = spec.attributes.violations();
            if !violations.is_empty() {
                let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
                return Err(CliError::Validation(text.join("; ")));
            }
            if spec.target_n == 0 {
                return Err(CliError::Validation("generation.target_n must be at least 1".into()));
            }
            if spec.is_custom() {
                let report = aigenie_core::prompt::validate_custom_prompts(spec);
                if !report.is_valid() {
                    return Err(CliError::Validation(report.to_string()));
                }
            }
        }
        Ok(())
    }

    /// The config for `provider`: the file's entry, else defaults (the key
    /// then comes from the environment).
    pub fn provider(&self, provider: Provider) -> ProviderConfig {
        self.providers
            .iter()
            .find(|p| p.provider == provider)
            .cloned()
            .unwrap_or_else(|| ProviderConfig::new(provider))
    }
}

/// Expand a whole-value `${NAME}` reference.
fn interpolate(value: &str, env: &impl Fn(&str) -> Option<String>) -> Result<String, CliError> {
    let trimmed = value.trim();
    match trimmed.strip_prefix("${").and_then(|v| v.strip_suffix('}')) {
        Some(name) => env(name).ok_or_else(|| {
            CliError::Validation(format!("api_key refers to ${{{name}}}, which is not set"))
        }),
        None => Ok(trimmed.to_string()),
    }
}
