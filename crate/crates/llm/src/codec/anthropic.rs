//! Anthropic messages API and model listing.

use aigenie_core::BackendError;
use serde::{Deserialize, Serialize};

use super::{decode, encode, non_default, protocol, ChatReply, TokenUsage};
use crate::params::{ChatParams, ANTHROPIC_DEFAULT_MAX_TOKENS};

pub const API_VERSION: &str = "2023-06-01";

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct MessagesRequest<'a> {
    model: &'a str,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    system: Option<&'a str>,
    messages: [Message<'a>; 1],
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_p: Option<f64>,
}

pub fn chat_request(model: &str, prompt: &str, params: &ChatParams) -> Vec<u8> {
    encode(&MessagesRequest {
        model,
        max_tokens: params.max_tokens.unwrap_or(ANTHROPIC_DEFAULT_MAX_TOKENS),
        system: params.system_role.as_deref(),
        messages: [Message {
            role: "user",
            content: prompt,
        }],
        temperature: non_default(params.temperature),
        top_p: non_default(params.top_p),
    })
}

#[derive(Deserialize)]
struct MessagesResponse {
    content: Vec<Block>,
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Block {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    text: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    input_tokens: u64,
    output_tokens: u64,
}

/// Text blocks are concatenated; other block types are ignored.
pub fn parse_chat(body: &str) -> Result<ChatReply, BackendError> {
    let parsed: MessagesResponse = decode(body, "messages response")?;
    let texts: Vec<String> = parsed
        .content
        .into_iter()
        .filter(|b| b.kind == "text")
        .filter_map(|b| b.text)
        .collect();
    if texts.is_empty() {
        return Err(protocol("messages response has no text block", body));
    }
    Ok(ChatReply {
        text: texts.concat(),
        usage: parsed.usage.map(|u| TokenUsage {
            input_tokens: u.input_tokens,
            output_tokens: u.output_tokens,
        }),
    })
}

#[derive(Deserialize)]
struct ModelList {
    data: Vec<ModelEntry>,
}

#[derive(Deserialize)]
struct ModelEntry {
    id: String,
}

pub fn parse_models(body: &str) -> Result<Vec<String>, BackendError> {
    let parsed: ModelList = decode(body, "model list")?;
    Ok(parsed.data.into_iter().map(|m| m.id).collect())
}
