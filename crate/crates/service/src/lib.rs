//! HTTP aggregation service: one `POST /classify` fans the request payload
//! out to every configured model endpoint, combines the returned confidence
//! vectors with a configured rule and answers with the decision.
//!
//! [`mock`] provides a fixture-backed model endpoint speaking the same wire
//! format, used by the tests and the `mock-model` subcommand.

pub mod aggregate;
pub mod config;
pub mod fanout;
pub mod mock;
pub mod server;
pub mod wire;

pub use aggregate::{aggregate, AggregationFailure};
pub use config::{resolve_config_path, AggregationPolicy, EndpointConfig, ServiceConfig, CONFIG_ENV};
pub use fanout::{fan_out, EndpointOutcome, FailureCause};
pub use mock::{MockConfig, MockModel, UnknownPayload};
pub use server::{router, serve, AppState};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] negfuse_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
