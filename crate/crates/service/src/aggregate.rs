use std::collections::HashMap;

use negfuse_core::{combine, EnsembleFrame, PredictionVector};

use crate::config::ServiceConfig;
use crate::fanout::{EndpointOutcome, FailureCause};
use crate::wire::{ClassifyResponse, FailureResponse, ModelStatus, Status};

/// Fewer successful responses than the quorum.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationFailure(pub FailureResponse);

/// Combines the successful outcomes (in configuration order) with the
/// configured method. Vectors whose length disagrees with the expected class
/// count are demoted to failures first.
pub fn aggregate(
    config: &ServiceConfig,
    outcomes: Vec<EndpointOutcome>,
) -> Result<ClassifyResponse, AggregationFailure> {
    debug_assert_eq!(outcomes.len(), config.endpoints.len());
    let outcomes = enforce_class_count(config.class_count, outcomes);

    let models: Vec<ModelStatus> = config
        .endpoints
        .iter()
        .zip(&outcomes)
        .map(|(e, o)| ModelStatus {
            model_id: e.model_id.clone(),
            status: o.as_ref().map_or_else(FailureCause::status, |_| Status::Ok),
            cause: o.as_ref().err().map(ToString::to_string),
        })
        .collect();

    let (records, vectors): (Vec<_>, Vec<_>) = config
        .endpoints
        .iter()
        .zip(outcomes)
        .filter_map(|(e, o)| o.ok().map(|v| (e.record(), v)))
        .unzip();

    let successes = vectors.len();
    if successes < config.policy.quorum || successes == 0 {
        return Err(AggregationFailure(FailureResponse {
            error: "aggregation failed".into(),
            quorum: config.policy.quorum,
            successes,
            models,
        }));
    }

    let frame = EnsembleFrame::new("request", records, vectors).expect("vectors share one class count");
    let decision = combine(&frame, config.policy.method, config.policy.tie);
    Ok(ClassifyResponse {
        predicted: decision.predicted.index(),
        method: decision.method,
        scores: decision.scores,
        models,
    })
}

fn enforce_class_count(configured: Option<usize>, outcomes: Vec<EndpointOutcome>) -> Vec<EndpointOutcome> {
    let Some(expected) = configured.or_else(|| modal_length(&outcomes)) else {
        return outcomes;
    };
    outcomes
        .into_iter()
        .map(|o| match o {
            Ok(v) if v.len() != expected => Err(FailureCause::ClassCount { expected, found: v.len() }),
            other => other,
        })
        .collect()
}

/// Most common vector length; the earliest endpoint wins ties.
fn modal_length(outcomes: &[EndpointOutcome]) -> Option<usize> {
    let lengths: Vec<usize> = outcomes.iter().flatten().map(PredictionVector::len).collect();
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in &lengths {
        *counts.entry(l).or_default() += 1;
    }
    let top = counts.values().copied().max()?;
    lengths.into_iter().find(|l| counts[l] == top)
}

#[cfg(test)]
mod tests {
    use negfuse_core::{combine_negation, Method, TiePolicy};

    use super::*;
    use crate::config::{AggregationPolicy, EndpointConfig};

    fn config(accs: &[f64], quorum: usize) -> ServiceConfig {
        ServiceConfig {
            class_count: None,
            endpoints: accs
                .iter()
                .enumerate()
                .map(|(i, &a)| EndpointConfig {
                    model_id: format!("m{i}"),
                    url: String::new(),
                    validation_accuracy: a,
                    timeout_ms: 100,
                })
                .collect(),
            policy: AggregationPolicy { method: Method::Negation, quorum, tie: TiePolicy::default() },
        }
    }

    fn ok(v: &[f64]) -> EndpointOutcome {
        Ok(PredictionVector::new(v.to_vec()).unwrap())
    }

    #[test]
    fn degraded_quorum_uses_live_models_only() {
        let cfg = config(&[0.9, 0.6, 0.8], 2);
        let out = aggregate(&cfg, vec![ok(&[0.7, 0.3]), ok(&[0.4, 0.6]), Err(FailureCause::Timeout)]).unwrap();
        let offline = combine_negation(
            &EnsembleFrame::from_raw("x", &[0.9, 0.6], &[vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap(),
            TiePolicy::default(),
        );
        assert_eq!(out.predicted, offline.predicted.index());
        assert_eq!(out.scores, offline.scores);
        assert_eq!(out.models[2].status, Status::Timeout);
    }

    #[test]
    fn quorum_violation_reports_causes() {
        let cfg = config(&[0.9, 0.6, 0.8], 3);
        let err = aggregate(&cfg, vec![ok(&[0.7, 0.3]), Err(FailureCause::HttpStatus(500)), ok(&[0.5, 0.5])])
            .unwrap_err();
        assert_eq!(err.0.successes, 2);
        assert_eq!(err.0.models[1].status, Status::Error);
        assert_eq!(err.0.models[1].cause.as_deref(), Some("HTTP 500"));
    }

    #[test]
    fn class_count_mismatch_is_an_endpoint_failure() {
        let cfg = config(&[0.9, 0.6, 0.8], 2);
        let out = aggregate(&cfg, vec![ok(&[0.7, 0.3]), ok(&[0.4, 0.3, 0.3]), ok(&[0.5, 0.5])]).unwrap();
        assert_eq!(out.models[1].status, Status::Error);
        assert_eq!(out.scores.len(), 2);

        let mut cfg = config(&[0.9, 0.6], 1);
        cfg.class_count = Some(3);
        let out = aggregate(&cfg, vec![ok(&[0.7, 0.3]), ok(&[0.4, 0.3, 0.3])]).unwrap();
        assert_eq!(out.models[0].status, Status::Error);
        assert_eq!(out.scores, vec![1.0 - 0.6 * 0.4, 1.0 - 0.6 * 0.3, 1.0 - 0.6 * 0.3]);
    }

    #[test]
    fn modal_length_prefers_earliest_on_ties() {
        assert_eq!(modal_length(&[ok(&[0.5, 0.5, 0.0]), ok(&[0.5, 0.5])]), Some(3));
        assert_eq!(modal_length(&[Err(FailureCause::Timeout)]), None);
    }
}
