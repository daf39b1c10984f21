//! Request encoding and response decoding for the two wire formats.

pub mod anthropic;
pub mod openai;

use aigenie_core::{BackendError, BackendErrorKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Tokens consumed by one completion, when the provider reports them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChatReply {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

/// Protocol error that keeps the provider's body for diagnosis.
pub(crate) fn protocol(what: &str, body: &str) -> BackendError {
    BackendError::new(BackendErrorKind::Protocol, format!("{what}; raw body: {body}"))
}

pub(crate) fn decode<T: DeserializeOwned>(body: &str, what: &str) -> Result<T, BackendError> {
    serde_json::from_str(body).map_err(|e| protocol(&format!("malformed {what} ({e})"), body))
}

pub(crate) fn encode<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("request bodies are plain data")
}

/// Sampling values are only sent when they differ from 1.0, the default of
/// every supported provider; some models reject them outright.
pub(crate) fn non_default(v: f64) -> Option<f64> {
    (v != 1.0).then_some(v)
}
