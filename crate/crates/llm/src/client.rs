//! One provider's client: chat, embeddings and model listing with retries
//! and bounded concurrency.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use aigenie_core::{BackendError, BackendErrorKind, EmbeddingMatrix};
use serde::Serialize;

use crate::catalog::{classify, CatalogEntry, CatalogError, ModelCatalog};
use crate::codec::{anthropic, openai, ChatReply, TokenUsage};
use crate::params::{resolve_model, ChatParams};
use crate::provider::{Provider, ProviderConfig, Secret, WireFormat};
use crate::transport::{HttpRequest, Method, Transport, UreqTransport};

/// One completion: which prompt and repetition it answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChatResponse {
    pub prompt_index: usize,
    pub rep: usize,
    pub text: String,
    pub usage: Option<TokenUsage>,
}

/// Responses ordered by prompt, then repetition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChatResult {
    pub responses: Vec<ChatResponse>,
}

impl ChatResult {
    pub fn texts(&self) -> Vec<&str> {
        self.responses.iter().map(|r| r.text.as_str()).collect()
    }

    /// Summed usage over the responses that reported it.
    pub fn total_usage(&self) -> Option<TokenUsage> {
        self.responses
            .iter()
            .filter_map(|r| r.usage)
            .reduce(|a, b| TokenUsage {
                input_tokens: a.input_tokens + b.input_tokens,
                output_tokens: a.output_tokens + b.output_tokens,
            })
    }
}

/// Shareable across threads; at most `max_in_flight` requests run at once
/// per call.
pub struct LlmClient {
    cfg: ProviderConfig,
    key: Option<Secret>,
    transport: Arc<dyn Transport>,
}

impl LlmClient {
    pub fn new(cfg: ProviderConfig) -> Result<Self, BackendError> {
        let transport = Arc::new(UreqTransport::new(Duration::from_secs(cfg.timeout_secs)));
        Self::with_transport(cfg, transport)
    }

    pub fn with_transport(cfg: ProviderConfig, transport: Arc<dyn Transport>) -> Result<Self, BackendError> {
        cfg.validate()?;
        let key = cfg.resolve_key();
        Ok(Self { cfg, key, transport })
    }

    pub fn provider(&self) -> Provider {
        self.cfg.provider
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    /// Keyless requests are allowed only against an overridden base URL
    /// (a local OpenAI-compatible server, say).
    fn headers(&self, json: bool) -> Result<Vec<(String, String)>, BackendError> {
        let mut headers = Vec::new();
        if json {
            headers.push(("content-type".into(), "application/json".into()));
        }
        match (&self.key, self.cfg.provider.wire_format()) {
            (Some(key), WireFormat::AnthropicMessages) => {
                headers.push(("x-api-key".into(), key.expose().to_string()));
            }
            (Some(key), WireFormat::OpenAiCompatible) => {
                headers.push(("authorization".into(), format!("Bearer {}", key.expose())));
            }
            (None, _) if self.cfg.base_url.is_some() => {}
            (None, _) => {
                return Err(BackendError::new(
                    BackendErrorKind::Config,
                    format!(
                        "no API key for {}: set api_key in the config or {}",
                        self.cfg.provider,
                        self.cfg.provider.key_env_var()
                    ),
                ))
            }
        }
        if self.cfg.provider == Provider::Anthropic {
            headers.push(("anthropic-version".into(), anthropic::API_VERSION.into()));
        }
        Ok(headers)
    }

    fn redact(&self, err: BackendError) -> BackendError {
        match &self.key {
            Some(key) => BackendError::new(err.kind, key.redact(&err.message)),
            None => err,
        }
    }

    /// Send with retries and return the success body. 401/403 fail at once
    /// as configuration errors; 429, 5xx and transport failures are retried
    /// per the policy.
    fn execute(&self, method: Method, path: &str, body: Option<Vec<u8>>) -> Result<String, BackendError> {
        let request = HttpRequest {
            method,
            url: format!("{}/{}", self.cfg.base_url(), path),
            headers: self.headers(body.is_some())?,
            body,
        };
        let policy = &self.cfg.retry;
        let provider = self.cfg.provider;
        let mut attempt = 1;
        loop {
            log::debug!("{provider}: {method:?} /{path} (attempt {attempt})");
            let outcome = self.transport.send(&request);
            let retryable = match &outcome {
                Ok(resp) if (200..300).contains(&resp.status) => return Ok(outcome.unwrap().body),
                Ok(resp) if resp.status == 401 || resp.status == 403 => {
                    return Err(self.redact(BackendError::new(
                        BackendErrorKind::Config,
                        format!("{provider} rejected the credentials (HTTP {}): {}", resp.status, resp.body),
                    )));
                }
                Ok(resp) => resp.status == 429 || resp.status >= 500,
                Err(e) => e.kind == BackendErrorKind::Transport,
            };
            if !retryable || attempt >= policy.max_attempts {
                let err = match outcome {
                    Ok(resp) if resp.status == 429 => BackendError::new(
                        BackendErrorKind::RateLimit,
                        format!("{provider} rate limit persisted after {attempt} attempts: {}", resp.body),
                    ),
                    Ok(resp) => BackendError::new(
                        BackendErrorKind::Protocol,
                        format!("{provider} answered HTTP {}; raw body: {}", resp.status, resp.body),
                    ),
                    Err(e) => e,
                };
                return Err(self.redact(err));
            }
            let wait = policy.delay(attempt);
            match &outcome {
                Ok(resp) => log::warn!("{provider}: HTTP {}, retrying in {wait:?}", resp.status),
                Err(e) => log::warn!("{provider}: {}, retrying in {wait:?}", self.redact(e.clone())),
            }
            std::thread::sleep(wait);
            attempt += 1;
        }
    }

    fn complete_one(&self, prompt: &str, params: &ChatParams) -> Result<ChatReply, BackendError> {
        let model = resolve_model(&params.model).id;
        let result = match self.cfg.provider.wire_format() {
            WireFormat::OpenAiCompatible => {
                let body = openai::chat_request(self.cfg.provider, &model, prompt, params);
                self.execute(Method::Post, "chat/completions", Some(body))
                    .and_then(|b| openai::parse_chat(&b))
            }
            WireFormat::AnthropicMessages => {
                let body = anthropic::chat_request(&model, prompt, params);
                self.execute(Method::Post, "messages", Some(body))
                    .and_then(|b| anthropic::parse_chat(&b))
            }
        };
        result.map_err(|e| self.redact(e))
    }

    /// `params.reps` completions for every prompt. Model aliases are
    /// expanded before sending.
    pub fn chat(&self, prompts: &[String], params: &ChatParams) -> Result<ChatResult, BackendError> {
        if prompts.is_empty() {
            return Err(BackendError::new(BackendErrorKind::Input, "at least one prompt is required"));
        }
        params.validate()?;
        let jobs: Vec<(usize, usize)> = (0..prompts.len())
            .flat_map(|p| (0..params.reps).map(move |r| (p, r)))
            .collect();
        let replies = ordered_map(&jobs, self.cfg.max_in_flight, |&(p, _)| {
            self.complete_one(&prompts[p], params)
        })?;
        let responses = jobs
            .into_iter()
            .zip(replies)
            .map(|((prompt_index, rep), reply)| ChatResponse {
                prompt_index,
                rep,
                text: reply.text,
                usage: reply.usage,
            })
            .collect();
        Ok(ChatResult { responses })
    }

    /// One column per text, in input order. Texts are sent in chunks of the
    /// configured batch size.
    pub fn embed_texts(&self, texts: &[String], model: &str) -> Result<EmbeddingMatrix, BackendError> {
        if texts.is_empty() {
            return Err(BackendError::new(BackendErrorKind::Input, "no texts to embed"));
        }
        if let Some(i) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(BackendError::new(BackendErrorKind::Input, format!("text {i} is empty")));
        }
        if !self.cfg.provider.supports_embeddings() {
            return Err(BackendError::new(
                BackendErrorKind::Config,
                format!("{} offers no embedding endpoint", self.cfg.provider),
            ));
        }
        let chunks: Vec<&[String]> = texts.chunks(self.cfg.embed_batch()).collect();
        let parts = ordered_map(&chunks, self.cfg.max_in_flight, |chunk| {
            let body = openai::embed_request(model, chunk);
            self.execute(Method::Post, "embeddings", Some(body))
                .and_then(|b| openai::parse_embeddings(&b, chunk.len()))
                .map_err(|e| self.redact(e))
        })?;
        let columns: Vec<Vec<f64>> = parts.into_iter().flatten().collect();
        let dims = columns[0].len();
        if dims == 0 {
            return Err(BackendError::new(BackendErrorKind::Protocol, "provider returned empty vectors"));
        }
        if let Some(i) = columns.iter().position(|c| c.len() != dims) {
            return Err(BackendError::new(
                BackendErrorKind::Protocol,
                format!("embedding {i} has {} dimensions, expected {dims}", columns[i].len()),
            ));
        }
        let ids = (1..=texts.len()).map(|i| i.to_string()).collect();
        EmbeddingMatrix::from_columns(ids, &columns)
            .map_err(|e| BackendError::new(BackendErrorKind::Protocol, e.to_string()))
    }

    pub fn list_models(&self) -> Result<Vec<CatalogEntry>, BackendError> {
        let body = self.execute(Method::Get, "models", None)?;
        let ids = match self.cfg.provider.wire_format() {
            WireFormat::OpenAiCompatible => openai::parse_models(&body),
            WireFormat::AnthropicMessages => anthropic::parse_models(&body),
        }
        .map_err(|e| self.redact(e))?;
        let provider = self.cfg.provider;
        Ok(ids
            .into_iter()
            .filter_map(|id| classify(provider, &id).map(|kind| CatalogEntry { provider, id, kind }))
            .collect())
    }
}

/// Query every client, merge, then filter. A failing provider leaves an
/// error entry and the others still contribute.
pub fn list_available_models(
    clients: &[LlmClient],
    provider: Option<Provider>,
    kind: Option<crate::catalog::ModelKind>,
) -> ModelCatalog {
    let mut catalog = ModelCatalog::default();
    if clients.is_empty() {
        catalog.errors.push(CatalogError {
            provider: None,
            message: "no providers configured".into(),
        });
        return catalog;
    }
    for client in clients.iter().filter(|c| provider.map_or(true, |p| c.provider() == p)) {
        match client.list_models() {
            Ok(entries) => entries.into_iter().for_each(|e| catalog.push(e)),
            Err(e) => catalog.errors.push(CatalogError {
                provider: Some(client.provider()),
                message: e.to_string(),
            }),
        }
    }
    catalog.filtered(provider, kind)
}

/// Apply `f` to every job with up to `workers` threads; results come back
/// in job order. On failure the error of the earliest failing job is
/// returned and no new jobs start.
fn ordered_map<T, R, F>(jobs: &[T], workers: usize, f: F) -> Result<Vec<R>, BackendError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, BackendError> + Sync,
{
    let workers = workers.clamp(1, jobs.len().max(1));
    if workers == 1 {
        return jobs.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let slots: Mutex<Vec<Option<Result<R, BackendError>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                if failed.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let out = f(&jobs[i]);
                if out.is_err() {
                    failed.store(true, Ordering::SeqCst);
                }
                slots.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    let slots = slots.into_inner().expect("worker panicked");
    let mut out = Vec::with_capacity(jobs.len());
    for slot in slots {
        match slot {
            Some(Ok(r)) => out.push(r),
            Some(Err(e)) => return Err(e),
            // Skipped after an earlier failure; that error comes first.
            None => continue,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_map_keeps_order() {
        let jobs: Vec<u64> = (0..40).collect();
        let out = ordered_map(&jobs, 4, |&j| {
            std::thread::sleep(Duration::from_micros((40 - j) * 50));
            Ok(j * 2)
        })
        .unwrap();
        assert_eq!(out, jobs.iter().map(|j| j * 2).collect::<Vec<_>>());
    }

    #[test]
    fn ordered_map_reports_first_failure() {
        let jobs: Vec<usize> = (0..10).collect();
        let err = ordered_map(&jobs, 3, |&j| {
            if j >= 4 {
                Err(BackendError::new(BackendErrorKind::Protocol, format!("job {j}")))
            } else {
                Ok(j)
            }
        })
        .unwrap_err();
        assert_eq!(err.message, "job 4");
    }

    #[test]
    fn missing_key_is_a_config_error() {
        let mut cfg = ProviderConfig::new(Provider::Jina);
        cfg.api_key = Some(Secret::new(""));
        // Only meaningful when the environment has no key either.
        if std::env::var(Provider::Jina.key_env_var()).is_err() {
            let client = LlmClient::new(cfg).unwrap();
            let err = client.embed_texts(&["x".into()], "jina-embeddings-v3").unwrap_err();
            assert_eq!(err.kind, BackendErrorKind::Config);
        }
    }
}
