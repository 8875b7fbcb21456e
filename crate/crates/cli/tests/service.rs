use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use guidemap::rank::RankedEntry;
use guidemap::results::write_record;
use guidemap::{parse_guideline, DecisionLog, ResultRecord};
use guidemap_cli::service::{bind, serve, ServiceState};
use serde_json::{json, Value};
use tokio::sync::oneshot;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn record(doc: &str, method: &str, ids: &[&str]) -> ResultRecord {
    ResultRecord {
        document_id: doc.into(),
        method: method.into(),
        k: 20,
        entries: ids
            .iter()
            .enumerate()
            .map(|(i, id)| RankedEntry { category_id: (*id).into(), score: (ids.len() - i) as f64, rank: i + 1 })
            .collect(),
        query_log: None,
        error: None,
    }
}

struct Server {
    base: String,
    stop: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<anyhow::Result<()>>,
}

impl Server {
    async fn shutdown(mut self) {
        self.stop.take().unwrap().send(()).unwrap();
        self.task.await.unwrap().unwrap();
    }
}

async fn start(results: &Path, decisions: &Path) -> Server {
    let guideline = parse_guideline(&std::fs::read(fixtures().join("guideline.json")).unwrap()).unwrap();
    let state = Arc::new(ServiceState::load(results, guideline, decisions).unwrap());
    let listener = bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = oneshot::channel();
    let task = tokio::spawn(serve(listener, state, async {
        let _ = rx.await;
    }));
    Server { base, stop: Some(tx), task }
}

fn write_fixture_results(dir: &Path) {
    write_record(dir, &record("lab-lists", "count-weighted", &["SDF-FDS-2", "SDF-FDS-1", "SDF-DM-1"])).unwrap();
    write_record(dir, &record("lab-lists", "embedding-unweighted-all", &["SDF-FDS-1"])).unwrap();
    write_record(dir, &record("hw-hashing", "count-weighted", &["SDF-FDS-3", "AL-FDSA-2"])).unwrap();
    write_record(dir, &ResultRecord::failed("scan", "count-weighted", 20, "no text layer")).unwrap();
}

async fn get(url: String) -> (u16, Value) {
    let r = reqwest::get(url).await.unwrap();
    (r.status().as_u16(), r.json().await.unwrap())
}

async fn post(url: String, body: Value) -> (u16, Value) {
    let r = reqwest::Client::new().post(url).json(&body).send().await.unwrap();
    (r.status().as_u16(), r.json().await.unwrap())
}

#[tokio::test]
async fn documents_list_suggestion_counts() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture_results(tmp.path());
    let server = start(tmp.path(), &tmp.path().join("decisions.jsonl")).await;
    let (status, body) = get(format!("{}/api/documents", server.base)).await;
    assert_eq!(status, 200);
    assert_eq!(
        body,
        json!([
            {"document_id": "hw-hashing", "suggestion_counts": {"count-weighted": 2}, "failed_methods": []},
            {"document_id": "lab-lists", "suggestion_counts": {"count-weighted": 3, "embedding-unweighted-all": 1}, "failed_methods": []},
            {"document_id": "scan", "suggestion_counts": {"count-weighted": 0}, "failed_methods": ["count-weighted"]}
        ])
    );
    server.shutdown().await;
}

#[tokio::test]
async fn suggestions_carry_context_in_rank_order() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture_results(tmp.path());
    let server = start(tmp.path(), &tmp.path().join("decisions.jsonl")).await;
    let (status, body) =
        get(format!("{}/api/documents/lab-lists/suggestions?method=count-weighted", server.base)).await;
    assert_eq!(status, 200);
    let entries = body["entries"].as_array().unwrap();
    let ranks: Vec<u64> = entries.iter().map(|e| e["rank"].as_u64().unwrap()).collect();
    assert_eq!(ranks, [1, 2, 3]);
    assert_eq!(entries[0]["text"], "Stacks and queues");
    assert_eq!(entries[0]["area_title"], "Software Development Fundamentals");
    assert_eq!(entries[0]["unit_title"], "Fundamental Data Structures");

    let (status, body) = get(format!("{}/api/documents/lab-lists/suggestions", server.base)).await;
    assert_eq!(status, 400, "{body}");
    let (status, _) = get(format!("{}/api/documents/hw-hashing/suggestions", server.base)).await;
    assert_eq!(status, 200);
    let (status, _) = get(format!("{}/api/documents/lab-lists/suggestions?method=llm-binary", server.base)).await;
    assert_eq!(status, 404);
    server.shutdown().await;
}

#[tokio::test]
async fn unknown_document_is_404_with_error_payload() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture_results(tmp.path());
    let server = start(tmp.path(), &tmp.path().join("decisions.jsonl")).await;
    let (status, body) = get(format!("{}/api/documents/nope/suggestions", server.base)).await;
    assert_eq!(status, 404);
    assert!(body["error"].as_str().unwrap().contains("nope"));
    let (status, _) = post(
        format!("{}/api/documents/nope/decisions", server.base),
        json!({"category_id": "SDF-FDS-1", "verdict": "accepted"}),
    )
    .await;
    assert_eq!(status, 404);
    server.shutdown().await;
}

#[tokio::test]
async fn category_context() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture_results(tmp.path());
    let server = start(tmp.path(), &tmp.path().join("decisions.jsonl")).await;
    let (status, body) = get(format!("{}/api/categories/AL-BA-3/context", server.base)).await;
    assert_eq!(status, 200);
    assert_eq!(body["kind"], "outcome");
    assert_eq!(body["outcome_level"], "familiarity");
    assert_eq!(body["area_title"], "Algorithms and Complexity");
    assert_eq!(body["unit_title"], "Basic Analysis");
    let (status, _) = get(format!("{}/api/categories/ZZ-9/context", server.base)).await;
    assert_eq!(status, 404);
    let (status, body) = get(format!("{}/api/guideline", server.base)).await;
    assert_eq!(status, 200);
    assert_eq!(body["name"], "Mini CS guideline");
    server.shutdown().await;
}

#[tokio::test]
async fn review_round_trip_exports_accepted_and_added_only() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture_results(tmp.path());
    let log_path = tmp.path().join("review/decisions.jsonl");
    let server = start(tmp.path(), &log_path).await;
    let url = format!("{}/api/documents/lab-lists/decisions", server.base);
    for body in [
        json!({"category_id": "SDF-FDS-2", "verdict": "accepted"}),
        json!({"category": "SDF-FDS-1", "accepted": true}),
        json!({"category_id": "SDF-DM-1", "verdict": "accepted"}),
        json!({"category_id": "SDF-DM-1", "accepted": false}),
        json!({"category_id": "SDF-DM-2", "verdict": "added"}),
    ] {
        let (status, reply) = post(url.clone(), body).await;
        assert_eq!(status, 201, "{reply}");
    }
    let expected = json!({
        "lab-lists": [
            {"category_id": "SDF-DM-2", "verdict": "added"},
            {"category_id": "SDF-FDS-1", "verdict": "accepted"},
            {"category_id": "SDF-FDS-2", "verdict": "accepted"}
        ]
    });
    assert_eq!(get(format!("{}/api/export", server.base)).await, (200, expected.clone()));
    assert_eq!(
        get(format!("{}/api/export?format=gold", server.base)).await.1,
        json!({"lab-lists": ["SDF-DM-2", "SDF-FDS-1", "SDF-FDS-2"]})
    );
    let (_, sugg) = get(format!("{}/api/documents/lab-lists/suggestions?method=count-weighted", server.base)).await;
    let verdicts: Vec<&Value> = sugg["entries"].as_array().unwrap().iter().map(|e| &e["verdict"]).collect();
    assert_eq!(verdicts, [&json!("accepted"), &json!("accepted"), &json!("rejected")]);
    server.shutdown().await;

    assert_eq!(std::fs::read_to_string(&log_path).unwrap().lines().count(), 5);
    let replayed = DecisionLog::open(&log_path).unwrap();
    assert_eq!(serde_json::to_value(replayed.export()).unwrap(), expected);
    let restarted = start(tmp.path(), &log_path).await;
    assert_eq!(get(format!("{}/api/export", restarted.base)).await.1, expected);
    restarted.shutdown().await;
}

#[tokio::test]
async fn invalid_decisions_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    write_fixture_results(tmp.path());
    let server = start(tmp.path(), &tmp.path().join("decisions.jsonl")).await;
    let url = format!("{}/api/documents/lab-lists/decisions", server.base);
    for body in [
        json!({"category_id": "NOPE", "verdict": "accepted"}),
        json!({"category_id": "SDF", "verdict": "added"}),
        json!({"category_id": "SDF-FDS-1"}),
        json!({"category_id": "SDF-FDS-1", "verdict": "accepted", "accepted": true}),
    ] {
        let (status, _) = post(url.clone(), body.clone()).await;
        assert_eq!(status, 422, "{body}");
    }
    assert_eq!(get(format!("{}/api/export", server.base)).await.1, json!({}));
    server.shutdown().await;
}

#[tokio::test]
async fn busy_port_is_a_startup_error() {
    let taken = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr: SocketAddr = taken.local_addr().unwrap();
    let err = bind(addr).await.unwrap_err();
    assert!(err.to_string().contains(&addr.to_string()), "{err}");
}
