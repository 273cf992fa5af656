//! HTTP gateway: resources with flags, file contents, case creation and
//! the webhook intake of the orchestrator.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use asef_core::{compare_reports, parse_config, parse_report, AsefCheck, DiffResult};
use asef_toolchain::orchestrator::{Orchestrator, OrchestratorError, PushEvent};
use asef_toolchain::resources::{CheckResource, CodeRepos, FileResource, Flag, Store, StoreError};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

pub const DEFAULT_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    /// Path prefix of every route, e.g. `/asef`; empty for none.
    pub base_path: String,
    /// Permissive cross-origin headers.
    pub cors: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            base_path: String::new(),
            cors: true,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<RwLock<Store>>,
    pub repos: Arc<dyn CodeRepos>,
    pub orchestrator: Option<Arc<Orchestrator>>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            error,
            message: message.into(),
        }
    }

    fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "UnknownResource", what)
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "ValidationError", message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "MalformedPayload", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.error, "message": self.message}))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownResource(_) => ApiError::not_found(e.to_string()),
            StoreError::Validation(_) | StoreError::UnresolvableFile(_) => ApiError::bad_request(e.to_string()),
            StoreError::Io { .. } => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "StoreError", e.to_string()),
        }
    }
}

impl From<OrchestratorError> for ApiError {
    fn from(e: OrchestratorError) -> Self {
        match e {
            OrchestratorError::UnknownRepo(_) => ApiError::new(StatusCode::NOT_FOUND, "UnknownRepository", e.to_string()),
            OrchestratorError::InvalidEvent(_) => ApiError::unprocessable(e.to_string()),
            e => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "OrchestratorError", e.to_string()),
        }
    }
}

type ApiResult<T = Json<Value>> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
pub struct Page {
    limit: Option<usize>,
    offset: Option<usize>,
}

fn paged<T: Serialize>(items: Vec<T>, page: &Page) -> Json<Value> {
    let limit = page.limit.unwrap_or(DEFAULT_LIMIT);
    let offset = page.offset.unwrap_or(0);
    let total = items.len();
    let items: Vec<T> = items.into_iter().skip(offset).take(limit).collect();
    Json(json!({"items": items, "total": total, "limit": limit, "offset": offset}))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("resources serialize")
}

fn read(state: &AppState) -> std::sync::RwLockReadGuard<'_, Store> {
    state.store.read().expect("store lock")
}

fn uri(store: &Store, segment: &str, id: &str) -> String {
    format!("{}/{segment}/{id}", store.base())
}

pub fn router(state: AppState, cfg: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/cases", get(list_cases).post(create_case))
        .route("/cases/{id}", get(get_case))
        .route("/cases/{id}/results", get(case_results))
        .route("/results/{id}", get(get_result))
        .route("/results/{id}/files", get(result_files))
        .route("/results/{id}/files/{file_id}", get(result_file))
        .route("/checks/{id}", get(get_check))
        .route("/locations/{id}", get(get_location))
        .route("/files/{id}", get(get_file))
        .route("/files/{id}/content", get(file_content))
        .route("/documents/{id}", get(get_document))
        .route("/code/{repo}/{*path}", get(code_file))
        .route("/webhook/code", post(webhook_code))
        .route("/webhook/analysis", post(webhook_analysis))
        .route("/runs", get(list_runs))
        .route("/runs/{id}", get(get_run))
        .route("/diff", get(diff))
        .with_state(state);
    let base = cfg.base_path.trim_end_matches('/');
    let app = if base.is_empty() { api } else { Router::new().nest(base, api) };
    if cfg.cors {
        app.layer(CorsLayer::permissive())
    } else {
        app
    }
}

/// Serves `router` until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, router: Router) -> std::io::Result<()> {
    axum::serve(listener, router).await
}

async fn list_cases(State(s): State<AppState>, Query(page): Query<Page>) -> ApiResult {
    let store = read(&s);
    Ok(paged(store.list_cases(), &page))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct NewCase {
    title: String,
    tool_id: String,
    repo_id: String,
    #[serde(default)]
    task_ref: Option<String>,
    file_links: Vec<String>,
    /// ASEF configuration document.
    config: String,
}

async fn create_case(State(s): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: NewCase = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let config = parse_config(&req.config).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let case = s.store.write().expect("store lock").create_case(
        &req.title,
        &req.tool_id,
        &req.repo_id,
        req.task_ref.as_deref(),
        &config,
        &req.file_links,
    )?;
    let mut resp = (StatusCode::CREATED, Json(json!({"uri": case.uri, "case": case}))).into_response();
    if let Ok(v) = HeaderValue::from_str(&case.uri) {
        resp.headers_mut().insert(header::LOCATION, v);
    }
    Ok(resp)
}

async fn get_case(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = read(&s);
    Ok(Json(to_value(store.case(&uri(&store, "cases", &id))?)))
}

async fn case_results(State(s): State<AppState>, Path(id): Path<String>, Query(page): Query<Page>) -> ApiResult {
    let store = read(&s);
    let items = store
        .results_for_case(&uri(&store, "cases", &id))?
        .into_iter()
        .map(|r| {
            let mut v = to_value(r);
            v["flag"] = to_value(&store.result_flag(&r.uri)?);
            Ok(v)
        })
        .collect::<Result<Vec<Value>, StoreError>>()?;
    Ok(paged(items, &page))
}

async fn get_result(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = read(&s);
    let r = store.result(&uri(&store, "results", &id))?;
    let mut v = to_value(r);
    v["flag"] = to_value(&store.result_flag(&r.uri)?);
    Ok(Json(v))
}

async fn result_files(State(s): State<AppState>, Path(id): Path<String>, Query(page): Query<Page>) -> ApiResult {
    let store = read(&s);
    let r = store.result(&uri(&store, "results", &id))?;
    let items = r
        .file_refs
        .iter()
        .map(|f| {
            let mut v = to_value(store.file(f)?);
            v["flag"] = to_value(&store.file_flag(&r.uri, f)?);
            Ok(v)
        })
        .collect::<Result<Vec<Value>, StoreError>>()?;
    Ok(paged(items, &page))
}

fn check_detail(store: &Store, c: &CheckResource) -> Result<Value, StoreError> {
    let at = store.terminal_location(&c.location_ref)?;
    let trace = c
        .trace
        .iter()
        .map(|t| {
            let l = store.terminal_location(t)?;
            Ok(json!({"uri": t, "line": l.line, "column": l.column, "fileRef": l.file_ref}))
        })
        .collect::<Result<Vec<Value>, StoreError>>()?;
    Ok(json!({
        "uri": c.uri,
        "category": c.category,
        "status": c.status,
        "flag": Flag::of_status(c.status),
        "message": c.message,
        "line": at.line,
        "column": at.column,
        "locationRef": c.location_ref,
        "trace": trace,
    }))
}

fn file_bytes(s: &AppState, f: &FileResource) -> ApiResult<Vec<u8>> {
    s.repos
        .read(&f.repo_id, &f.path, &f.commit)
        .map_err(|e| ApiError::new(StatusCode::BAD_GATEWAY, "RepositoryError", e))
}

/// The file at the result's commit with numbered lines, a flag per flagged
/// line and the details of every check on the file.
async fn result_file(State(s): State<AppState>, Path((id, file_id)): Path<(String, String)>) -> ApiResult {
    let (file, result_uri, flag, lines) = {
        let store = read(&s);
        let r = store.result(&uri(&store, "results", &id))?;
        let file_uri = uri(&store, "files", &file_id);
        if !r.file_refs.contains(&file_uri) {
            return Err(ApiError::not_found(format!("{file_uri} is not a file of {}", r.uri)));
        }
        let file = store.file(&file_uri)?.clone();
        let flag = store.file_flag(&r.uri, &file_uri)?;
        let lines: BTreeMap<u32, Vec<Value>> = store
            .line_flags(&r.uri, &file_uri)?
            .into_iter()
            .map(|(line, checks)| Ok((line, checks.iter().map(|c| check_detail(&store, c)).collect::<Result<_, StoreError>>()?)))
            .collect::<Result<_, StoreError>>()?;
        (file, r.uri.clone(), flag, lines)
    };
    let bytes = file_bytes(&s, &file)?;
    let text = String::from_utf8_lossy(&bytes);
    let numbered: Vec<Value> = text
        .lines()
        .enumerate()
        .map(|(i, t)| {
            let n = i as u32 + 1;
            let checks = lines.get(&n);
            let flag = checks.map(|cs| {
                Flag::of_statuses(cs.iter().filter_map(|c| c["status"].as_str()?.parse().ok()))
            });
            json!({
                "number": n,
                "text": t,
                "flag": flag,
                "checkRefs": checks.map(|cs| cs.iter().map(|c| c["uri"].clone()).collect::<Vec<_>>()).unwrap_or_default(),
            })
        })
        .collect();
    let checks: Vec<Value> = lines.into_values().flatten().collect();
    Ok(Json(json!({
        "result": result_uri,
        "file": file,
        "flag": flag,
        "lines": numbered,
        "checks": checks,
    })))
}

async fn get_check(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = read(&s);
    Ok(Json(to_value(store.check(&uri(&store, "checks", &id))?)))
}

async fn get_location(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = read(&s);
    Ok(Json(to_value(store.location(&uri(&store, "locations", &id))?)))
}

async fn get_file(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let store = read(&s);
    Ok(Json(to_value(store.file(&uri(&store, "files", &id))?)))
}

async fn file_content(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let file = {
        let store = read(&s);
        store.file(&uri(&store, "files", &id))?.clone()
    };
    let bytes = file_bytes(&s, &file)?;
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], bytes).into_response())
}

async fn get_document(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let store = read(&s);
    let text = store.document_text(&uri(&store, "documents", &id))?;
    Ok(([(header::CONTENT_TYPE, "application/xml")], text).into_response())
}

#[derive(Debug, Deserialize)]
struct CodeQuery {
    commit: Option<String>,
}

async fn code_file(
    State(s): State<AppState>,
    Path((repo, path)): Path<(String, String)>,
    Query(q): Query<CodeQuery>,
) -> ApiResult<Response> {
    let commit = q.commit.unwrap_or_else(|| "HEAD".into());
    let bytes = s
        .repos
        .read(&repo, &path, &commit)
        .map_err(|e| ApiError::not_found(format!("{repo}/{path}@{commit}: {e}")))?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], bytes).into_response())
}

fn orchestrator(s: &AppState) -> ApiResult<Arc<Orchestrator>> {
    s.orchestrator
        .clone()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "NoOrchestrator", "no orchestrator is running"))
}

fn push_event(body: &Bytes) -> ApiResult<PushEvent> {
    let v: Value = serde_json::from_slice(body).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    PushEvent::from_payload(&v).map_err(ApiError::unprocessable)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "InternalError", e.to_string()))?
}

async fn webhook_code(State(s): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let event = push_event(&body)?;
    let orch = orchestrator(&s)?;
    let runs = blocking(move || Ok(orch.handle_push(event)?)).await?;
    Ok((StatusCode::ACCEPTED, Json(json!({"runs": runs}))).into_response())
}

async fn webhook_analysis(State(s): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let mut event = push_event(&body)?;
    let orch = orchestrator(&s)?;
    event.repo_id = orch.config().analysis_repo.repo_id.clone();
    let summary = blocking(move || Ok(orch.handle_analysis_repo_push(&event)?)).await?;
    Ok((StatusCode::ACCEPTED, Json(json!({"summary": summary}))).into_response())
}

async fn list_runs(State(s): State<AppState>, Query(page): Query<Page>) -> ApiResult {
    let runs = s.orchestrator.as_ref().map(|o| o.runs()).unwrap_or_default();
    Ok(paged(runs, &page))
}

async fn get_run(State(s): State<AppState>, Path(id): Path<u64>) -> ApiResult {
    let run = orchestrator(&s)?
        .run(id)
        .ok_or_else(|| ApiError::not_found(format!("run {id}")))?;
    Ok(Json(to_value(&run)))
}

#[derive(Debug, Deserialize)]
struct DiffQuery {
    a: String,
    b: String,
}

fn check_summary(c: &AsefCheck) -> Value {
    json!({"id": c.id, "category": c.category, "status": c.status, "locationRef": c.location_ref, "message": c.message})
}

/// `DiffResult` as JSON.
pub fn diff_json(d: &DiffResult) -> Value {
    json!({
        "matched": d.matched.iter().map(|m| json!({
            "a": check_summary(&m.a),
            "b": check_summary(&m.b),
            "commonCategory": m.common_category,
        })).collect::<Vec<_>>(),
        "onlyInA": d.only_in_a.iter().map(check_summary).collect::<Vec<_>>(),
        "onlyInB": d.only_in_b.iter().map(check_summary).collect::<Vec<_>>(),
        "statusConflicts": d.status_conflicts.iter().map(|(a, b)| json!({"a": check_summary(a), "b": check_summary(b)})).collect::<Vec<_>>(),
    })
}

/// Compares the reports of two results, named by URI or id.
async fn diff(State(s): State<AppState>, Query(q): Query<DiffQuery>) -> ApiResult {
    let store = read(&s);
    let report = |r: &str| -> ApiResult<asef_core::AsefReport> {
        let r_uri = if r.contains("://") { r.to_string() } else { uri(&store, "results", r) };
        let result = store.result(&r_uri)?;
        let text = store.document_text(&result.report_ref)?;
        parse_report(&text).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "StoreError", e.to_string()))
    };
    let (a, b) = (report(&q.a)?, report(&q.b)?);
    Ok(Json(diff_json(&compare_reports(&a, &b))))
}
