//! Blocking HTTP transport and the process-wide offline guard.
//!
//! Every request leaves the process through [`Transport::send`]. The ureq
//! transport refuses to connect while the guard is on and counts both
//! outcomes, so a caller can prove afterwards that nothing was opened.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Duration;

use aigenie_core::{BackendError, BackendErrorKind};

static OFFLINE: AtomicBool = AtomicBool::new(false);
static SENT: AtomicUsize = AtomicUsize::new(0);
static BLOCKED: AtomicUsize = AtomicUsize::new(0);

/// Turn the offline guard on or off for the whole process.
pub fn set_offline(on: bool) {
    OFFLINE.store(on, Ordering::SeqCst);
}

pub fn is_offline() -> bool {
    OFFLINE.load(Ordering::SeqCst)
}

/// Requests that reached the network since process start.
pub fn requests_sent() -> usize {
    SENT.load(Ordering::SeqCst)
}

/// Requests refused by the offline guard since process start.
pub fn requests_blocked() -> usize {
    BLOCKED.load(Ordering::SeqCst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

#[derive(Debug, Clone)]
pub struct HttpRequest {
    pub method: Method,
    pub url: String,
    /// Header values may hold credentials; never log them.
    pub headers: Vec<(String, String)>,
    pub body: Option<Vec<u8>>,
}

#[derive(Debug, Clone)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, BackendError>;
}

const MAX_BODY_BYTES: u64 = 512 * 1024 * 1024;

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build();
        Self {
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl Transport for UreqTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, BackendError> {
        if is_offline() {
            BLOCKED.fetch_add(1, Ordering::SeqCst);
            return Err(BackendError::new(
                BackendErrorKind::Offline,
                format!("offline mode refused a request to {}", request.url),
            ));
        }
        SENT.fetch_add(1, Ordering::SeqCst);
        let transport_err = |e: ureq::Error| BackendError::new(BackendErrorKind::Transport, e.to_string());
        let response = match request.method {
            Method::Get => {
                let mut req = self.agent.get(&request.url);
                for (k, v) in &request.headers {
                    req = req.header(k.as_str(), v.as_str());
                }
                req.call()
            }
            Method::Post => {
                let mut req = self.agent.post(&request.url);
                for (k, v) in &request.headers {
                    req = req.header(k.as_str(), v.as_str());
                }
                req.send(request.body.as_deref().unwrap_or_default())
            }
        };
        let mut response = response.map_err(transport_err)?;
        let status = response.status().as_u16();
        // Large embedding batches exceed ureq's 10 MB default.
        let body = response
            .body_mut()
            .with_config()
            .limit(MAX_BODY_BYTES)
            .read_to_string()
            .map_err(transport_err)?;
        Ok(HttpResponse { status, body })
    }
}
