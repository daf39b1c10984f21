//! Interfaces to chat and embedding providers.
//!
//! The pipeline only talks to models through these traits; HTTP clients
//! implement them elsewhere and tests substitute scripted fakes.

use crate::embedding::EmbeddingMatrix;
use crate::error::BackendError;

pub trait ChatModel: Send + Sync {
    /// One completion for `prompt`, optionally under a system role.
    fn complete(&self, prompt: &str, system_role: Option<&str>) -> Result<String, BackendError>;
}

pub trait Embedder: Send + Sync {
    /// Embed `texts`; column `i` of the result belongs to `texts[i]`. The
    /// returned matrix's item ids are placeholders the caller replaces.
    fn embed(&self, texts: &[String]) -> Result<EmbeddingMatrix, BackendError>;
}
