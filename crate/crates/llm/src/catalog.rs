//! Merged model catalog across configured providers.

use std::fmt;
use std::str::FromStr;

use aigenie_core::{BackendError, BackendErrorKind};
use serde::{Deserialize, Serialize};

use crate::provider::Provider;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Chat,
    Embedding,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Chat => "chat",
            ModelKind::Embedding => "embedding",
        })
    }
}

impl FromStr for ModelKind {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chat" => Ok(ModelKind::Chat),
            "embedding" | "embeddings" => Ok(ModelKind::Embedding),
            other => Err(BackendError::new(
                BackendErrorKind::Input,
                format!("unknown model type `{other}` (expected chat or embedding)"),
            )),
        }
    }
}

/// Models the catalog leaves out: neither chat nor text embedding.
const EXCLUDED: &[&str] = &[
    "whisper", "tts", "dall-e", "moderation", "rerank", "transcribe", "guard", "image", "audio", "realtime",
];

const EMBEDDING_MARKERS: &[&str] = &["embed", "bge-", "gte-", "e5-", "minilm", "mpnet", "clip"];

/// Decide the kind of a listed model from its id, or `None` to drop it.
pub fn classify(provider: Provider, id: &str) -> Option<ModelKind> {
    let lower = id.to_ascii_lowercase();
    if EXCLUDED.iter().any(|m| lower.contains(m)) {
        return None;
    }
    if provider == Provider::Anthropic {
        return Some(ModelKind::Chat);
    }
    if EMBEDDING_MARKERS.iter().any(|m| lower.contains(m)) {
        Some(ModelKind::Embedding)
    } else {
        Some(ModelKind::Chat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub provider: Provider,
    pub id: String,
    #[serde(rename = "type")]
    pub kind: ModelKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogError {
    pub provider: Option<Provider>,
    pub message: String,
}

/// Entries are unique on `(provider, id)` and kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ModelCatalog {
    pub entries: Vec<CatalogEntry>,
    pub errors: Vec<CatalogError>,
}

impl ModelCatalog {
    pub fn push(&mut self, entry: CatalogEntry) {
        if !self
            .entries
            .iter()
            .any(|e| e.provider == entry.provider && e.id == entry.id)
        {
            self.entries.push(entry);
        }
    }

    /// Both filters must hold when both are given.
    pub fn filtered(mut self, provider: Option<Provider>, kind: Option<ModelKind>) -> Self {
        self.entries
            .retain(|e| provider.map_or(true, |p| e.provider == p) && kind.map_or(true, |k| e.kind == k));
        self
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(provider: Provider, id: &str) -> CatalogEntry {
        CatalogEntry {
            provider,
            id: id.into(),
            kind: classify(provider, id).unwrap(),
        }
    }

    #[test]
    fn classification() {
        assert_eq!(classify(Provider::OpenAi, "gpt-4o"), Some(ModelKind::Chat));
        assert_eq!(classify(Provider::OpenAi, "text-embedding-3-small"), Some(ModelKind::Embedding));
        assert_eq!(classify(Provider::OpenAi, "whisper-1"), None);
        assert_eq!(classify(Provider::HuggingFace, "BAAI/bge-small-en-v1.5"), Some(ModelKind::Embedding));
        assert_eq!(classify(Provider::Jina, "jina-embeddings-v3"), Some(ModelKind::Embedding));
        assert_eq!(classify(Provider::Jina, "jina-reranker-v2-base-multilingual"), None);
    }

    #[test]
    fn filters_are_conjunctive_and_entries_unique() {
        let mut cat = ModelCatalog::default();
        cat.push(entry(Provider::OpenAi, "gpt-4o"));
        cat.push(entry(Provider::OpenAi, "gpt-4o"));
        cat.push(entry(Provider::OpenAi, "text-embedding-3-small"));
        cat.push(entry(Provider::Jina, "jina-embeddings-v3"));
        assert_eq!(cat.entries.len(), 3);
        assert_eq!(cat.clone().filtered(None, Some(ModelKind::Chat)).ids(), ["gpt-4o"]);
        assert_eq!(
            cat.filtered(Some(Provider::OpenAi), Some(ModelKind::Embedding)).ids(),
            ["text-embedding-3-small"]
        );
    }
}
