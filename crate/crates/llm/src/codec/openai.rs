//! OpenAI-compatible chat completions, embeddings and model listing. Used
//! for OpenAI, Groq, Jina and the HuggingFace router.

use aigenie_core::BackendError;
use serde::{Deserialize, Serialize};

use super::{decode, encode, non_default, protocol, ChatReply, TokenUsage};
use crate::params::ChatParams;
use crate::provider::Provider;

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<Message<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_completion_tokens: Option<u32>,
}

pub fn chat_request(provider: Provider, model: &str, prompt: &str, params: &ChatParams) -> Vec<u8> {
    let mut messages = Vec::with_capacity(2);
    if let Some(system) = params.system_role.as_deref() {
        messages.push(Message {
            role: "system",
            content: system,
        });
    }
    messages.push(Message {
        role: "user",
        content: prompt,
    });
    // OpenAI's newer models only accept `max_completion_tokens`.
    let (max_tokens, max_completion_tokens) = match provider {
        Provider::OpenAi => (None, params.max_tokens),
        _ => (params.max_tokens, None),
    };
    encode(&ChatRequest {
        model,
        messages,
        temperature: non_default(params.temperature),
        top_p: non_default(params.top_p),
        max_tokens,
        max_completion_tokens,
    })
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

pub fn parse_chat(body: &str) -> Result<ChatReply, BackendError> {
    let parsed: ChatResponse = decode(body, "chat completion")?;
    let text = parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| protocol("chat completion has no message content", body))?;
    Ok(ChatReply {
        text,
        usage: parsed.usage.map(|u| TokenUsage {
            input_tokens: u.prompt_tokens,
            output_tokens: u.completion_tokens,
        }),
    })
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

pub fn embed_request(model: &str, texts: &[String]) -> Vec<u8> {
    encode(&EmbedRequest { model, input: texts })
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedDatum>,
}

#[derive(Deserialize)]
struct EmbedDatum {
    index: usize,
    embedding: Vec<f64>,
}

/// Vectors in input order. The `index` field decides placement, so a
/// provider answering out of order is handled.
pub fn parse_embeddings(body: &str, expected: usize) -> Result<Vec<Vec<f64>>, BackendError> {
    let parsed: EmbedResponse = decode(body, "embedding response")?;
    if parsed.data.len() != expected {
        return Err(protocol(
            &format!("expected {expected} embeddings, got {}", parsed.data.len()),
            body,
        ));
    }
    let mut out: Vec<Option<Vec<f64>>> = vec![None; expected];
    for d in parsed.data {
        match out.get_mut(d.index) {
            Some(slot @ None) => *slot = Some(d.embedding),
            _ => return Err(protocol(&format!("bad or repeated embedding index {}", d.index), body)),
        }
    }
    Ok(out.into_iter().map(|v| v.expect("all slots filled")).collect())
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
