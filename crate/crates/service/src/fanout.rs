use std::fmt;

use axum::body::Bytes;
use futures::future::join_all;
use negfuse_core::PredictionVector;
use reqwest::header::CONTENT_TYPE;

use crate::config::EndpointConfig;
use crate::wire::{ModelResponse, Status};
use crate::ServiceError;

/// Why an endpoint produced no usable vector.
#[derive(Debug, Clone, PartialEq)]
pub enum FailureCause {
    Timeout,
    Connection(String),
    HttpStatus(u16),
    Malformed(String),
    ClassCount { expected: usize, found: usize },
}

impl FailureCause {
    pub fn status(&self) -> Status {
        match self {
            FailureCause::Timeout => Status::Timeout,
            _ => Status::Error,
        }
    }
}

impl fmt::Display for FailureCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureCause::Timeout => f.write_str("timed out"),
            FailureCause::Connection(e) => write!(f, "request failed: {e}"),
            FailureCause::HttpStatus(code) => write!(f, "HTTP {code}"),
            FailureCause::Malformed(e) => write!(f, "malformed response: {e}"),
            FailureCause::ClassCount { expected, found } => {
                write!(f, "returned {found} classes, expected {expected}")
            }
        }
    }
}

/// Result of calling one endpoint, in configuration order.
pub type EndpointOutcome = Result<PredictionVector, FailureCause>;

/// Sends `payload` to every endpoint at once, each bounded by its own
/// timeout. A failing endpoint never affects the others' results.
pub async fn fan_out(
    client: &reqwest::Client,
    endpoints: &[EndpointConfig],
    payload: Bytes,
    content_type: Option<&str>,
) -> Result<Vec<EndpointOutcome>, ServiceError> {
    if endpoints.is_empty() {
        return Err(ServiceError::Config("no endpoints to call".into()));
    }
    let calls = endpoints
        .iter()
        .map(|e| invoke(client, e, payload.clone(), content_type));
    Ok(join_all(calls).await)
}

async fn invoke(
    client: &reqwest::Client,
    endpoint: &EndpointConfig,
    payload: Bytes,
    content_type: Option<&str>,
) -> EndpointOutcome {
    let mut request = client
        .post(endpoint.invocation_url())
        .timeout(endpoint.timeout())
        .body(payload);
    if let Some(ct) = content_type {
        request = request.header(CONTENT_TYPE, ct);
    }
    let call = async {
        let response = request.send().await.map_err(classify_error)?;
        if !response.status().is_success() {
            return Err(FailureCause::HttpStatus(response.status().as_u16()));
        }
        let body = response.bytes().await.map_err(classify_error)?;
        let parsed: ModelResponse =
            serde_json::from_slice(&body).map_err(|e| FailureCause::Malformed(e.to_string()))?;
        PredictionVector::new(parsed.confidences).map_err(|e| FailureCause::Malformed(e.to_string()))
    };
    // Outer bound on the whole exchange, body read included.
    match tokio::time::timeout(endpoint.timeout(), call).await {
        Ok(outcome) => outcome,
        Err(_) => Err(FailureCause::Timeout),
    }
}

fn classify_error(err: reqwest::Error) -> FailureCause {
    if err.is_timeout() {
        FailureCause::Timeout
    } else {
        FailureCause::Connection(err.to_string())
    }
}
