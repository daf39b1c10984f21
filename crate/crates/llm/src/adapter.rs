//! Bridges from [`LlmClient`] to the core backend traits.

use std::sync::Arc;

use aigenie_core::{BackendError, BackendErrorKind, ChatModel, Embedder, EmbeddingMatrix};

use crate::client::LlmClient;
use crate::params::ChatParams;

/// Chat backend for item generation: one completion per call.
pub struct ChatBackend {
    client: Arc<LlmClient>,
    params: ChatParams,
}

impl ChatBackend {
    pub fn new(client: Arc<LlmClient>, params: ChatParams) -> Self {
        Self { client, params }
    }
}

impl ChatModel for ChatBackend {
    fn complete(&self, prompt: &str, system_role: Option<&str>) -> Result<String, BackendError> {
        let params = ChatParams {
            reps: 1,
            system_role: system_role.map(str::to_string).or_else(|| self.params.system_role.clone()),
            ..self.params.clone()
        };
        let mut result = self.client.chat(&[prompt.to_string()], &params)?;
        result
            .responses
            .pop()
            .map(|r| r.text)
            .ok_or_else(|| BackendError::new(BackendErrorKind::Protocol, "no response"))
    }
}

pub struct EmbedBackend {
    client: Arc<LlmClient>,
    model: String,
}

impl EmbedBackend {
    pub fn new(client: Arc<LlmClient>, model: impl Into<String>) -> Self {
        Self {
            client,
            model: model.into(),
        }
    }
}

impl Embedder for EmbedBackend {
    fn embed(&self, texts: &[String]) -> Result<EmbeddingMatrix, BackendError> {
        self.client.embed_texts(texts, &self.model)
    }
}
