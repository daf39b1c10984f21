//! HTTP clients for chat and embedding providers.
//!
//! OpenAI, Groq, Jina and the HuggingFace router share the OpenAI-compatible
//! wire format; Anthropic uses its messages API. [`LlmClient`] adds retries,
//! bounded concurrency and key redaction on top of a [`Transport`], and the
//! [`adapter`] module plugs it into the core pipeline.

pub mod adapter;
pub mod catalog;
pub mod client;
pub mod codec;
pub mod params;
pub mod provider;
pub mod transport;

pub use adapter::{ChatBackend, EmbedBackend};
pub use catalog::{CatalogEntry, ModelCatalog, ModelKind};
pub use client::{list_available_models, ChatResponse, ChatResult, LlmClient};
pub use codec::{ChatReply, TokenUsage};
pub use params::{resolve_model, ChatParams, ResolvedModel};
pub use provider::{Provider, ProviderConfig, RetryPolicy, Secret};
pub use transport::{is_offline, requests_blocked, requests_sent, set_offline, Transport, UreqTransport};
