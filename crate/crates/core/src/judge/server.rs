//! HTTP + JSON service over a [`JudgeStore`].
//!
//! Every request carries `Authorization: Bearer <token>`; tokens map to
//! assessors in the TOML config. `/agreement` and `/export/qrels` need an
//! admin token. Every response body is a JSON object with `schema_version`;
//! errors look like `{"schema_version":1,"error":{"code":..,"message":..}}`.
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/health` | |
//! | GET | `/topics` | |
//! | GET | `/topics/{id}/pool` | |
//! | POST | `/topics/{id}/judgments` | `{"judgments":[{"docno":..,"grade":0..3}]}` |
//! | GET | `/ties` | |
//! | POST | `/ties/{pair}/resolution` | `{"grade":0..3}` |
//! | GET | `/agreement` | |
//! | GET | `/export/qrels?break_ties=false` | |
//!
//! Writes accept an `Idempotency-Key` header. A repeated key returns the
//! original acknowledgement with status 200 instead of 201.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;

use super::export::ExclusionRule;
use super::store::{Collection, JudgeSettings, JudgeStore};
use super::SCHEMA_VERSION;
use crate::corpus::{read_documents_file, read_topics_file, Grade};
use crate::error::{Error, Result};
use crate::pool::PoolSet;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct AssessorConfig {
    pub id: String,
    pub token: String,
    #[serde(default)]
    pub admin: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    pub data_dir: PathBuf,
    pub pools: PathBuf,
    pub topics: PathBuf,
    pub documents: PathBuf,
    #[serde(default = "default_assessors")]
    pub assessors_per_pair: usize,
    #[serde(default = "default_votes")]
    pub second_round_votes: usize,
    #[serde(default = "default_snapshot")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub exclusion: ExclusionRule,
    pub assessors: Vec<AssessorConfig>,
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}
fn default_assessors() -> usize {
    JudgeSettings::default().assessors_per_pair
}
fn default_votes() -> usize {
    JudgeSettings::default().second_round_votes
}
fn default_snapshot() -> usize {
    JudgeSettings::default().snapshot_every
}

impl ServerConfig {
    /// Parses a config; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut c: ServerConfig =
            toml::from_str(text).map_err(|e| Error::validation(None, format!("server config: {e}")))?;
        for p in [&mut c.data_dir, &mut c.pools, &mut c.topics, &mut c.documents] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.assessors.is_empty() {
            return Err(Error::validation(None, "server config lists no assessors"));
        }
        let mut ids = std::collections::HashSet::new();
        let mut tokens = std::collections::HashSet::new();
        for a in &self.assessors {
            if a.id.is_empty() || a.token.len() < 8 {
                return Err(Error::validation(
                    None,
                    format!("assessor {:?} needs an id and a token of at least 8 bytes", a.id),
                ));
            }
            if !ids.insert(&a.id) || !tokens.insert(&a.token) {
                return Err(Error::validation(None, format!("assessor {:?} or its token is repeated", a.id)));
            }
        }
        Ok(())
    }

    pub fn settings(&self) -> JudgeSettings {
        JudgeSettings {
            assessors_per_pair: self.assessors_per_pair,
            second_round_votes: self.second_round_votes,
            snapshot_every: self.snapshot_every,
        }
    }

    /// Loads pools, topics and documents and opens the journal.
    pub fn open_store(&self) -> Result<JudgeStore> {
        let pools = PoolSet::read_json(
            std::fs::File::open(&self.pools).map_err(|e| Error::file(&self.pools, e))?,
        )?;
        let topics = read_topics_file(&self.topics)?;
        let documents = read_documents_file(&self.documents)?;
        JudgeStore::open(&self.data_dir, Collection::new(pools, topics, documents)?, self.settings())
    }
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<RwLock<JudgeStore>>,
    assessors: Arc<Vec<AssessorConfig>>,
    exclusion: ExclusionRule,
}

impl AppState {
    pub fn new(store: JudgeStore, assessors: Vec<AssessorConfig>, exclusion: ExclusionRule) -> Self {
        AppState {
            store: Arc::new(RwLock::new(store)),
            assessors: Arc::new(assessors),
            exclusion,
        }
    }

    pub fn store(&self) -> Arc<RwLock<JudgeStore>> {
        self.store.clone()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/topics", get(list_topics))
        .route("/topics/{id}/pool", get(get_pool))
        .route("/topics/{id}/judgments", post(post_judgments))
        .route("/ties", get(list_ties))
        .route("/ties/{pair}/resolution", post(post_resolution))
        .route("/agreement", get(get_agreement))
        .route("/export/qrels", get(get_export))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(state)
}

/// Serves until Ctrl-C.
pub async fn serve(config: ServerConfig) -> Result<()> {
    let store = config.open_store()?;
    let app = router(AppState::new(store, config.assessors.clone(), config.exclusion));
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    eprintln!("judge service listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    missing: Option<Vec<String>>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            missing: None,
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Incomplete { missing } => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                code: "incomplete",
                message,
                missing: Some(missing),
            },
            Error::Validation { .. } | Error::InvalidArgument(_) | Error::Parse { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message)
            }
            Error::Unauthorized(_) => ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", message),
            Error::Conflict(_) => ApiError::new(StatusCode::CONFLICT, "conflict", message),
            Error::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", message),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "code": self.code, "message": self.message });
        if let Some(m) = self.missing {
            error["missing"] = json!(m);
        }
        (self.status, Json(json!({ "schema_version": SCHEMA_VERSION, "error": error }))).into_response()
    }
}

type ApiResult = std::result::Result<(StatusCode, Json<Value>), ApiError>;

/// Wraps `body` (an object) with the schema version.
fn reply<T: Serialize>(status: StatusCode, body: T) -> ApiResult {
    let mut v = serde_json::to_value(body).map_err(|e| ApiError::from(Error::from(e)))?;
    match v.as_object_mut() {
        Some(o) => {
            o.insert("schema_version".into(), json!(SCHEMA_VERSION));
        }
        None => v = json!({ "schema_version": SCHEMA_VERSION, "data": v }),
    }
    Ok((status, Json(v)))
}

/// Byte comparison whose time depends only on the lengths.
fn same_token(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

fn authenticate<'a>(state: &'a AppState, headers: &HeaderMap) -> std::result::Result<&'a AssessorConfig, ApiError> {
    let token = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or_else(|| ApiError::from(Error::Unauthorized("missing bearer token".into())))?;
    let mut found = None;
    for a in state.assessors.iter() {
        if same_token(a.token.as_bytes(), token.as_bytes()) {
            found = Some(a);
        }
    }
    found.ok_or_else(|| ApiError::from(Error::Unauthorized("unknown token".into())))
}

fn require_admin(a: &AssessorConfig) -> std::result::Result<(), ApiError> {
    if a.admin {
        Ok(())
    } else {
        Err(ApiError::new(StatusCode::FORBIDDEN, "forbidden", "admin token required"))
    }
}

fn topic_param(id: &str) -> std::result::Result<u32, ApiError> {
    id.parse()
        .map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", format!("bad topic id {id:?}")))
}

fn idempotency_key(headers: &HeaderMap) -> std::result::Result<Option<String>, ApiError> {
    match headers.get("idempotency-key") {
        None => Ok(None),
        Some(v) => match v.to_str() {
            Ok(s) if !s.is_empty() && s.len() <= 200 => Ok(Some(s.to_string())),
            _ => Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_request", "bad Idempotency-Key header")),
        },
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

async fn health() -> ApiResult {
    reply(StatusCode::OK, json!({ "status": "ok" }))
}

async fn list_topics(State(state): State<AppState>, headers: HeaderMap) -> ApiResult {
    let who = authenticate(&state, &headers)?;
    let store = state.store.read().await;
    reply(
        StatusCode::OK,
        json!({ "assessor_id": who.id, "topics": store.topics_for(&who.id) }),
    )
}

async fn get_pool(State(state): State<AppState>, headers: HeaderMap, UrlPath(id): UrlPath<String>) -> ApiResult {
    let who = authenticate(&state, &headers)?;
    let topic = topic_param(&id)?;
    let store = state.store.read().await;
    reply(StatusCode::OK, store.pool_view(&who.id, topic)?)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JudgmentBody {
    judgments: Vec<GradeEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GradeEntry {
    docno: String,
    grade: Grade,
}

async fn post_judgments(
    State(state): State<AppState>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<String>,
    body: std::result::Result<Json<JudgmentBody>, JsonRejection>,
) -> ApiResult {
    let who = authenticate(&state, &headers)?;
    let topic = topic_param(&id)?;
    let key = idempotency_key(&headers)?;
    let Json(body) = body?;
    let grades: Vec<(String, Grade)> = body.judgments.into_iter().map(|g| (g.docno, g.grade)).collect();
    let mut store = state.store.write().await;
    let out = store.submit_judgments(&who.id, topic, &grades, key.as_deref(), now_ms())?;
    let status = if out.replayed { StatusCode::OK } else { StatusCode::CREATED };
    reply(status, json!({ "replayed": out.replayed, "ack": out.ack }))
}

async fn list_ties(State(state): State<AppState>, headers: HeaderMap) -> ApiResult {
    let who = authenticate(&state, &headers)?;
    let store = state.store.read().await;
    reply(StatusCode::OK, json!({ "ties": store.ties_for(&who.id)? }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResolutionBody {
    grade: Grade,
}

async fn post_resolution(
    State(state): State<AppState>,
    headers: HeaderMap,
    UrlPath(pair): UrlPath<String>,
    body: std::result::Result<Json<ResolutionBody>, JsonRejection>,
) -> ApiResult {
    let who = authenticate(&state, &headers)?;
    let key = idempotency_key(&headers)?;
    let Json(body) = body?;
    let mut store = state.store.write().await;
    let out = store.submit_resolution(&who.id, &pair, body.grade, key.as_deref(), now_ms())?;
    let status = if out.replayed { StatusCode::OK } else { StatusCode::CREATED };
    reply(status, json!({ "replayed": out.replayed, "ack": out.ack }))
}

async fn get_agreement(State(state): State<AppState>, headers: HeaderMap) -> ApiResult {
    require_admin(authenticate(&state, &headers)?)?;
    let store = state.store.read().await;
    reply(StatusCode::OK, store.agreement())
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    #[serde(default)]
    break_ties: bool,
}

async fn get_export(
    State(state): State<AppState>,
    headers: HeaderMap,
    Query(q): Query<ExportQuery>,
) -> ApiResult {
    require_admin(authenticate(&state, &headers)?)?;
    let store = state.store.read().await;
    let report = store.export(state.exclusion, q.break_ties)?;
    let text = report.qrels_text();
    let mut v = serde_json::to_value(&report).map_err(|e| ApiError::from(Error::from(e)))?;
    v["qrels_text"] = json!(text);
    reply(StatusCode::OK, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Topic};
    use crate::pool::{balanced_interleave, Source};
    use axum::body::Body;
    use axum::http::Request;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    fn app() -> Router {
        let pools = PoolSet {
            schema_version: crate::pool::SCHEMA_VERSION,
            depth: 2,
            model_a: "bm25".into(),
            model_b: "dirichlet_lm".into(),
            first_pick: Source::A,
            pools: vec![balanced_interleave(1, &["d1"], &["d2"], 2)],
        };
        let topics = vec![Topic {
            topic_id: 1,
            title: "udan boot".into(),
            description: String::new(),
            narrative: String::new(),
        }];
        let docs = vec![Document::new("d1", "Udan", "udan boot iha Dili"), Document::new("d2", "Bee", "bee saleng")];
        let settings = JudgeSettings {
            assessors_per_pair: 2,
            second_round_votes: 1,
            snapshot_every: 0,
        };
        let store = JudgeStore::in_memory(Collection::new(pools, topics, docs).unwrap(), settings).unwrap();
        let assessors = vec![
            AssessorConfig {
                id: "ana".into(),
                token: "token-ana".into(),
                admin: true,
            },
            AssessorConfig {
                id: "joao".into(),
                token: "token-joao".into(),
                admin: false,
            },
        ];
        let rule = ExclusionRule {
            min_relevant: 0,
            max_relevant: 100,
        };
        router(AppState::new(store, assessors, rule))
    }

    async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string()))
                .unwrap(),
            None => req.body(Body::empty()).unwrap(),
        };
        let resp = app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, serde_json::from_slice(&bytes).unwrap())
    }

    #[tokio::test]
    async fn auth_and_views() {
        let app = app();
        let (s, v) = call(&app, "GET", "/topics", None, None).await;
        assert_eq!(s, StatusCode::UNAUTHORIZED);
        assert_eq!(v["error"]["code"], "unauthorized");
        assert_eq!(v["schema_version"], 1);
        let (s, _) = call(&app, "GET", "/topics", Some("token-nobody"), None).await;
        assert_eq!(s, StatusCode::UNAUTHORIZED);
        let (s, v) = call(&app, "GET", "/topics", Some("token-joao"), None).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["topics"][0]["pool_size"], 2);
        let (s, v) = call(&app, "GET", "/topics/1/pool", Some("token-joao"), None).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["documents"][0]["title"], "Udan");
        let (s, _) = call(&app, "GET", "/topics/9/pool", Some("token-joao"), None).await;
        assert_eq!(s, StatusCode::NOT_FOUND);
        let (s, _) = call(&app, "GET", "/agreement", Some("token-joao"), None).await;
        assert_eq!(s, StatusCode::FORBIDDEN);
    }

    #[tokio::test]
    async fn submission_lifecycle() {
        let app = app();
        let partial = json!({ "judgments": [{ "docno": "d1", "grade": 2 }] });
        let (s, v) = call(&app, "POST", "/topics/1/judgments", Some("token-ana"), Some(partial)).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(v["error"]["missing"], json!(["d2"]));

        let (s, _) = call(&app, "POST", "/topics/1/judgments", Some("token-ana"), Some(json!({ "judgments": 5 }))).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);

        let bad_grade = json!({ "judgments": [{ "docno": "d1", "grade": 7 }, { "docno": "d2", "grade": 0 }] });
        let (s, _) = call(&app, "POST", "/topics/1/judgments", Some("token-ana"), Some(bad_grade)).await;
        assert!(s.is_client_error());

        let full = json!({ "judgments": [{ "docno": "d1", "grade": 3 }, { "docno": "d2", "grade": 0 }] });
        let (s, v) = call(&app, "POST", "/topics/1/judgments", Some("token-ana"), Some(full.clone())).await;
        assert_eq!(s, StatusCode::CREATED);
        assert_eq!(v["ack"]["records"], 2);
        let (s, v) = call(&app, "POST", "/topics/1/judgments", Some("token-ana"), Some(full.clone())).await;
        assert_eq!(s, StatusCode::CONFLICT);
        assert_eq!(v["error"]["code"], "conflict");

        let other = json!({ "judgments": [{ "docno": "d1", "grade": 1 }, { "docno": "d2", "grade": 0 }] });
        let (s, _) = call(&app, "POST", "/topics/1/judgments", Some("token-joao"), Some(other)).await;
        assert_eq!(s, StatusCode::CREATED);

        let (_, v) = call(&app, "GET", "/ties", Some("token-joao"), None).await;
        assert_eq!(v["ties"][0]["pair"], "1:d1");
        let (s, _) = call(&app, "GET", "/export/qrels", Some("token-ana"), None).await;
        assert_eq!(s, StatusCode::CONFLICT);
        let (s, v) = call(&app, "POST", "/ties/1:d1/resolution", Some("token-joao"), Some(json!({ "grade": 2 }))).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
        let (s, v) = call(&app, "POST", "/ties/1:d1/resolution", Some("token-joao"), Some(json!({ "grade": 1 }))).await;
        assert_eq!(s, StatusCode::CREATED);
        assert_eq!(v["ack"]["resolved"]["grade"], 1);

        let (s, v) = call(&app, "GET", "/export/qrels", Some("token-ana"), None).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["qrels_text"], "1 0 d1 1\n1 0 d2 0\n");
        let (s, v) = call(&app, "GET", "/agreement", Some("token-ana"), None).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["assessors"], json!(["ana", "joao"]));
    }

    #[test]
    fn config_parsing() {
        let text = r#"
            data_dir = "state"
            pools = "pools.json"
            topics = "/abs/topics.xml"
            documents = "docs.xml"
            [exclusion]
            min_relevant = 3
            [[assessors]]
            id = "ana"
            token = "0123456789"
            admin = true
        "#;
        let c = ServerConfig::parse(text, Path::new("/srv/judge")).unwrap();
        assert_eq!(c.data_dir, Path::new("/srv/judge/state"));
        assert_eq!(c.topics, Path::new("/abs/topics.xml"));
        assert_eq!(c.exclusion.min_relevant, 3);
        assert_eq!(c.exclusion.max_relevant, 100);
        assert_eq!(c.assessors_per_pair, 5);
        assert!(ServerConfig::parse(&text.replace("0123456789", "short"), Path::new(".")).is_err());
        assert!(same_token(b"abc", b"abc"));
        assert!(!same_token(b"abc", b"abd"));
        assert!(!same_token(b"abc", b"ab"));
    }
}
