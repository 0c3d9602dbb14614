//! JSON bodies exchanged with clients and model endpoints.

use negfuse_core::Method;
use serde::{Deserialize, Serialize};

/// Body of a model endpoint's `POST /invocations` response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub confidences: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Timeout,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelStatus {
    pub model_id: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
}

/// Successful `POST /classify` response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub predicted: usize,
    pub method: Method,
    pub scores: Vec<f64>,
    pub models: Vec<ModelStatus>,
}

/// `POST /classify` response when fewer than `quorum` models answered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureResponse {
    pub error: String,
    pub quorum: usize,
    pub successes: usize,
    pub models: Vec<ModelStatus>,
}
