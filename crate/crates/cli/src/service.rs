//! JSON service over stored results for the review interface. Results are
//! read once at startup; review decisions are the only writable state.

use std::collections::BTreeMap;
use std::future::Future;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};

use anyhow::{Context, Result};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;

use guidemap::ontology::{CategoryKind, OutcomeLevel};
use guidemap::results::load_results;
use guidemap::review::{export_as_gold, export_decisions};
use guidemap::{CategoryId, DecisionLog, Guideline, ResultRecord, ReviewDecision, Verdict};

pub struct ServiceState {
    guideline: Guideline,
    guideline_json: String,
    /// document id -> method -> record
    results: BTreeMap<String, BTreeMap<String, ResultRecord>>,
    decisions: Mutex<DecisionLog>,
}

impl ServiceState {
    pub fn new(guideline: Guideline, records: Vec<ResultRecord>, decisions: DecisionLog) -> Self {
        let mut results: BTreeMap<String, BTreeMap<String, ResultRecord>> = BTreeMap::new();
        for r in records {
            results.entry(r.document_id.clone()).or_default().insert(r.method.clone(), r);
        }
        Self { guideline_json: guideline.to_json(), guideline, results, decisions: Mutex::new(decisions) }
    }

    pub fn load(results_dir: &Path, guideline: Guideline, decisions: &Path) -> Result<Self> {
        let records =
            load_results(results_dir).with_context(|| format!("reading results under {}", results_dir.display()))?;
        let log = DecisionLog::open(decisions).with_context(|| format!("opening {}", decisions.display()))?;
        Ok(Self::new(guideline, records, log))
    }
}

#[derive(Debug)]
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn not_found(what: impl Into<String>) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, what.into())
}

pub fn router(state: Arc<ServiceState>) -> Router {
    Router::new()
        .route("/api/documents", get(list_documents))
        .route("/api/documents/{id}/suggestions", get(suggestions))
        .route("/api/documents/{id}/decisions", get(document_decisions).post(post_decision))
        .route("/api/categories/{id}/context", get(category_context))
        .route("/api/guideline", get(guideline))
        .route("/api/export", get(export))
        .with_state(state)
}

/// Binds `addr`, failing with a clear message when the port is taken.
pub async fn bind(addr: SocketAddr) -> Result<TcpListener> {
    TcpListener::bind(addr).await.with_context(|| format!("cannot listen on {addr} (port busy or not permitted)"))
}

pub async fn serve(
    listener: TcpListener,
    state: Arc<ServiceState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await.context("serving HTTP")
}

#[derive(Serialize)]
struct DocumentSummary {
    document_id: String,
    suggestion_counts: BTreeMap<String, usize>,
    failed_methods: Vec<String>,
}

async fn list_documents(State(s): State<Arc<ServiceState>>) -> Json<Vec<DocumentSummary>> {
    Json(
        s.results
            .iter()
            .map(|(doc, by_method)| DocumentSummary {
                document_id: doc.clone(),
                suggestion_counts: by_method.iter().map(|(m, r)| (m.clone(), r.entries.len())).collect(),
                failed_methods: by_method.iter().filter(|(_, r)| r.is_failed()).map(|(m, _)| m.clone()).collect(),
            })
            .collect(),
    )
}

#[derive(Deserialize)]
struct MethodQuery {
    method: Option<String>,
}

#[derive(Serialize)]
struct Suggestion {
    category_id: CategoryId,
    score: f64,
    rank: usize,
    text: String,
    kind: CategoryKind,
    area_title: Option<String>,
    unit_title: Option<String>,
    verdict: Option<Verdict>,
}

#[derive(Serialize)]
struct Suggestions {
    document_id: String,
    method: String,
    k: usize,
    error: Option<String>,
    entries: Vec<Suggestion>,
}

fn latest_verdicts(s: &ServiceState, doc: &str) -> BTreeMap<CategoryId, Verdict> {
    let log = s.decisions.lock().expect("decision log lock");
    log.decisions().iter().filter(|d| d.document_id == doc).map(|d| (d.category_id.clone(), d.verdict)).collect()
}

async fn suggestions(
    State(s): State<Arc<ServiceState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<MethodQuery>,
) -> ApiResult<Suggestions> {
    let by_method = s.results.get(&id).ok_or_else(|| not_found(format!("unknown document `{id}`")))?;
    let record = match &q.method {
        Some(m) => by_method.get(m).ok_or_else(|| not_found(format!("no `{m}` results for document `{id}`")))?,
        None if by_method.len() == 1 => by_method.values().next().expect("one method"),
        None => {
            let methods: Vec<&str> = by_method.keys().map(String::as_str).collect();
            return Err(ApiError(
                StatusCode::BAD_REQUEST,
                format!("several methods available, pass ?method= one of {}", methods.join(", ")),
            ));
        }
    };
    let verdicts = latest_verdicts(&s, &id);
    let entries = record
        .entries
        .iter()
        .map(|e| {
            let cat = s.guideline.category(&e.category_id);
            let ctx = s.guideline.context_of(&e.category_id).ok();
            Suggestion {
                category_id: e.category_id.clone(),
                score: e.score,
                rank: e.rank,
                text: cat.as_ref().map(|c| c.text.clone()).unwrap_or_default(),
                kind: cat.map_or(CategoryKind::Topic, |c| c.kind),
                area_title: ctx.as_ref().map(|c| c.area_title.clone()),
                unit_title: ctx.map(|c| c.unit_title),
                verdict: verdicts.get(&e.category_id).copied(),
            }
        })
        .collect();
    Ok(Json(Suggestions {
        document_id: id,
        method: record.method.clone(),
        k: record.k,
        error: record.error.clone(),
        entries,
    }))
}

#[derive(Serialize)]
struct CategoryView {
    category_id: CategoryId,
    text: String,
    kind: CategoryKind,
    outcome_level: Option<OutcomeLevel>,
    area_title: Option<String>,
    unit_title: Option<String>,
}

async fn category_context(State(s): State<Arc<ServiceState>>, UrlPath(id): UrlPath<String>) -> ApiResult<CategoryView> {
    let id = CategoryId(id);
    let cat = s.guideline.category(&id).ok_or_else(|| not_found(format!("unknown category `{id}`")))?;
    let ctx = s.guideline.context_of(&id).ok();
    Ok(Json(CategoryView {
        category_id: id,
        text: cat.text,
        kind: cat.kind,
        outcome_level: cat.outcome_level,
        area_title: ctx.as_ref().map(|c| c.area_title.clone()),
        unit_title: ctx.map(|c| c.unit_title),
    }))
}

async fn guideline(State(s): State<Arc<ServiceState>>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], s.guideline_json.clone())
}

/// Either `verdict` or the `accepted` shorthand must be given.
#[derive(Deserialize)]
struct DecisionBody {
    #[serde(alias = "category")]
    category_id: CategoryId,
    verdict: Option<Verdict>,
    accepted: Option<bool>,
}

async fn post_decision(
    State(s): State<Arc<ServiceState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<DecisionBody>,
) -> Result<(StatusCode, Json<ReviewDecision>), ApiError> {
    if !s.results.contains_key(&id) {
        return Err(not_found(format!("unknown document `{id}`")));
    }
    let verdict = match (body.verdict, body.accepted) {
        (Some(v), None) => v,
        (None, Some(true)) => Verdict::Accepted,
        (None, Some(false)) => Verdict::Rejected,
        _ => {
            return Err(ApiError(
                StatusCode::UNPROCESSABLE_ENTITY,
                "give exactly one of `verdict` or `accepted`".into(),
            ))
        }
    };
    match s.guideline.category(&body.category_id) {
        Some(c) if c.is_rateable() => {}
        Some(_) => {
            return Err(ApiError(
                StatusCode::UNPROCESSABLE_ENTITY,
                format!("`{}` is a heading and cannot be labelled", body.category_id),
            ))
        }
        None => {
            return Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, format!("unknown category `{}`", body.category_id)))
        }
    }
    let decision = ReviewDecision::now(&id, body.category_id, verdict);
    s.decisions
        .lock()
        .expect("decision log lock")
        .append(decision.clone())
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("recording decision: {e}")))?;
    Ok((StatusCode::CREATED, Json(decision)))
}

async fn document_decisions(
    State(s): State<Arc<ServiceState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Vec<ReviewDecision>> {
    if !s.results.contains_key(&id) {
        return Err(not_found(format!("unknown document `{id}`")));
    }
    let log = s.decisions.lock().expect("decision log lock");
    Ok(Json(log.decisions().iter().filter(|d| d.document_id == id).cloned().collect()))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

/// `?format=gold` drops verdicts so the export can serve as evaluation labels.
async fn export(State(s): State<Arc<ServiceState>>, Query(q): Query<ExportQuery>) -> Response {
    let export = export_decisions(s.decisions.lock().expect("decision log lock").decisions());
    match q.format.as_deref() {
        None | Some("labels") => Json(export).into_response(),
        Some("gold") => Json(export_as_gold(&export)).into_response(),
        Some(other) => ApiError(StatusCode::BAD_REQUEST, format!("unknown export format `{other}`")).into_response(),
    }
}
