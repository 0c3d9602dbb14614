use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use negfuse_core::{Method, ModelRecord, TiePolicy};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

/// Environment variable naming the service configuration file when no path
/// is given explicitly.
pub const CONFIG_ENV: &str = "NEGFUSE_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub model_id: String,
    /// Base URL of the model server; requests go to `{url}/invocations`.
    pub url: String,
    pub validation_accuracy: f64,
    pub timeout_ms: u64,
}

impl EndpointConfig {
    pub fn invocation_url(&self) -> String {
        format!("{}/invocations", self.url.trim_end_matches('/'))
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn record(&self) -> ModelRecord {
        ModelRecord::new(self.model_id.clone(), self.validation_accuracy)
            .expect("endpoint accuracies are validated with the config")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregationPolicy {
    pub method: Method,
    /// Minimum number of successful model responses needed to answer.
    pub quorum: usize,
    #[serde(default)]
    pub tie: TiePolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Expected vector length. When absent, the most common length among
    /// the responses of a request is used (earliest endpoint on ties).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_count: Option<usize>,
    pub endpoints: Vec<EndpointConfig>,
    pub policy: AggregationPolicy,
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let config: ServiceConfig = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        let n = self.endpoints.len();
        if n == 0 {
            return Err(ServiceError::Config("no endpoints configured".into()));
        }
        if self.policy.quorum == 0 || self.policy.quorum > n {
            return Err(ServiceError::Config(format!(
                "quorum {} must lie in 1..={n}",
                self.policy.quorum
            )));
        }
        if let Some(k) = self.class_count {
            if k < 2 {
                return Err(ServiceError::Config(format!("class_count {k} is below 2")));
            }
        }
        let mut seen = HashSet::new();
        for e in &self.endpoints {
            if !seen.insert(e.model_id.as_str()) {
                return Err(ServiceError::Config(format!("duplicate model_id `{}`", e.model_id)));
            }
            ModelRecord::new(e.model_id.clone(), e.validation_accuracy)
                .map_err(|err| ServiceError::Config(format!("endpoint `{}`: {err}", e.model_id)))?;
            if e.timeout_ms == 0 {
                return Err(ServiceError::Config(format!("endpoint `{}`: timeout_ms must be positive", e.model_id)));
            }
        }
        Ok(())
    }
}

/// The explicit path if given, otherwise the one named by [`CONFIG_ENV`].
pub fn resolve_config_path(explicit: Option<PathBuf>) -> Option<PathBuf> {
    explicit.or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
}
