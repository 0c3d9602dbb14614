use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::Router;
use negfuse_core::io::PredictionMap;
use negfuse_core::{combine, EnsembleFrame, Method, PredictionVector, TiePolicy};
use negfuse_service::wire::{ClassifyResponse, FailureResponse, ModelResponse, Status};
use negfuse_service::{
    fan_out, router, AggregationPolicy, AppState, EndpointConfig, FailureCause, MockModel, ServiceConfig,
    UnknownPayload,
};

async fn spawn(app: Router) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}")
}

fn fixture(entries: &[(&str, &[f64])]) -> PredictionMap {
    entries
        .iter()
        .map(|(k, v)| (k.to_string(), PredictionVector::new(v.to_vec()).unwrap()))
        .collect()
}

fn endpoint(id: &str, url: &str, accuracy: f64, timeout_ms: u64) -> EndpointConfig {
    EndpointConfig {
        model_id: id.into(),
        url: url.into(),
        validation_accuracy: accuracy,
        timeout_ms,
    }
}

async fn post(url: &str, body: &'static str) -> reqwest::Response {
    reqwest::Client::new().post(url).body(body).send().await.unwrap()
}

#[tokio::test]
async fn mock_serves_fixture_vector() {
    let url = spawn(MockModel::new(fixture(&[("img-1", &[0.2, 0.8])]), 2).router()).await;
    let response = post(&format!("{url}/invocations"), "img-1").await;
    assert_eq!(response.status(), 200);
    let body: ModelResponse = serde_json::from_slice(&response.bytes().await.unwrap()).unwrap();
    assert_eq!(body.confidences, vec![0.2, 0.8]);

    assert_eq!(post(&format!("{url}/invocations"), "img-2").await.status(), 404);
    assert_eq!(reqwest::get(format!("{url}/healthz")).await.unwrap().status(), 200);
}

#[tokio::test]
async fn mock_unknown_payload_can_be_uniform() {
    let model = MockModel::new(fixture(&[]), 4).with_unknown(UnknownPayload::Uniform);
    let url = spawn(model.router()).await;
    let response = post(&format!("{url}/invocations"), "anything").await;
    let body: ModelResponse = serde_json::from_slice(&response.bytes().await.unwrap()).unwrap();
    assert_eq!(body.confidences, vec![0.25; 4]);
}

#[tokio::test]
async fn mock_failure_injection_and_latency() {
    let url = spawn(MockModel::new(fixture(&[("x", &[1.0, 0.0])]), 2).with_failure_rate(1.0).router()).await;
    for _ in 0..5 {
        assert_eq!(post(&format!("{url}/invocations"), "x").await.status(), 500);
    }

    let slow = MockModel::new(fixture(&[("x", &[1.0, 0.0])]), 2).with_latency(Duration::from_millis(50));
    let url = spawn(slow.router()).await;
    let started = Instant::now();
    assert_eq!(post(&format!("{url}/invocations"), "x").await.status(), 200);
    assert!(started.elapsed() >= Duration::from_millis(50));
}

#[tokio::test]
async fn fan_out_is_concurrent() {
    let mut endpoints = Vec::new();
    for i in 0..3 {
        let mock = MockModel::new(fixture(&[("x", &[0.5, 0.5])]), 2).with_latency(Duration::from_millis(10));
        endpoints.push(endpoint(&format!("m{i}"), &spawn(mock.router()).await, 0.8, 1000));
    }
    let client = reqwest::Client::new();
    let started = Instant::now();
    let results = fan_out(&client, &endpoints, Bytes::from_static(b"x"), None).await.unwrap();
    assert!(started.elapsed() < Duration::from_millis(200));
    assert!(results.iter().all(Result::is_ok));

    assert!(fan_out(&client, &[], Bytes::from_static(b"x"), None).await.is_err());
}

#[tokio::test]
async fn fan_out_isolates_timeouts() {
    let fast = MockModel::new(fixture(&[("x", &[0.3, 0.7])]), 2);
    let slow = MockModel::new(fixture(&[("x", &[0.9, 0.1])]), 2).with_latency(Duration::from_millis(400));
    let endpoints = vec![
        endpoint("fast", &spawn(fast.router()).await, 0.8, 100),
        endpoint("slow", &spawn(slow.router()).await, 0.8, 100),
        endpoint("down", "http://127.0.0.1:9", 0.8, 100),
    ];
    let results = fan_out(&reqwest::Client::new(), &endpoints, Bytes::from_static(b"x"), None).await.unwrap();
    assert_eq!(results[0].as_ref().unwrap().as_slice(), &[0.3, 0.7]);
    assert_eq!(results[1], Err(FailureCause::Timeout));
    assert!(matches!(results[2], Err(FailureCause::Connection(_)) | Err(FailureCause::Timeout)));
}

/// Three models on the two-class example where negation and averaging
/// disagree; the third model is uniform and moves no negation score.
async fn divergence_service(quorum: usize, third_up: bool) -> String {
    let vectors: [&[f64]; 3] = [&[0.7, 0.3], &[0.4, 0.6], &[0.5, 0.5]];
    let accuracies = [0.9, 0.6, 0.5];
    let mut endpoints = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let url = if i == 2 && !third_up {
            "http://127.0.0.1:9".to_string()
        } else {
            spawn(MockModel::new(fixture(&[("sample", v)]), 2).router()).await
        };
        endpoints.push(endpoint(&format!("m{i}"), &url, accuracies[i], 500));
    }
    let config = ServiceConfig {
        class_count: Some(2),
        endpoints,
        policy: AggregationPolicy { method: Method::Negation, quorum, tie: TiePolicy::default() },
    };
    spawn(router(AppState::new(config).unwrap())).await
}

#[tokio::test]
async fn classify_matches_offline_combiner() {
    let url = divergence_service(3, true).await;
    let response = post(&format!("{url}/classify"), "sample").await;
    assert_eq!(response.status(), 200);
    let decision: ClassifyResponse = serde_json::from_slice(&response.bytes().await.unwrap()).unwrap();

    let frame = EnsembleFrame::from_raw(
        "sample",
        &[0.9, 0.6, 0.5],
        &[vec![0.7, 0.3], vec![0.4, 0.6], vec![0.5, 0.5]],
    )
    .unwrap();
    let offline = combine(&frame, Method::Negation, TiePolicy::default());
    assert_eq!(decision.predicted, 1);
    assert_eq!(decision.predicted, offline.predicted.index());
    assert_eq!(decision.scores, offline.scores);
    assert!(decision.models.iter().all(|m| m.status == Status::Ok));
}

#[tokio::test]
async fn quorum_violation_fails_aggregation() {
    let url = divergence_service(3, false).await;
    let response = post(&format!("{url}/classify"), "sample").await;
    assert_eq!(response.status(), 503);
    let failure: FailureResponse = serde_json::from_slice(&response.bytes().await.unwrap()).unwrap();
    assert_eq!(failure.successes, 2);
    assert_eq!(failure.quorum, 3);
    assert_ne!(failure.models[2].status, Status::Ok);
    assert!(failure.models[2].cause.is_some());
}

#[tokio::test]
async fn degraded_quorum_combines_live_models() {
    let url = divergence_service(2, false).await;
    let response = post(&format!("{url}/classify"), "sample").await;
    assert_eq!(response.status(), 200);
    let decision: ClassifyResponse = serde_json::from_slice(&response.bytes().await.unwrap()).unwrap();
    let frame = EnsembleFrame::from_raw("sample", &[0.9, 0.6], &[vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
    let offline = combine(&frame, Method::Negation, TiePolicy::default());
    assert_eq!(decision.scores, offline.scores);
    assert_eq!(decision.predicted, offline.predicted.index());
    assert_eq!(decision.models[0].status, Status::Ok);
    assert_ne!(decision.models[2].status, Status::Ok);

    assert_eq!(reqwest::get(format!("{url}/healthz")).await.unwrap().status(), 200);
}
