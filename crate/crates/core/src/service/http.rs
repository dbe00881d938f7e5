use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::SystemTime;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::registry::{model_id, register_model, LoadedModel, ModelRegistry};
use super::{fronts_response, item_response, query_response, FrontsResponse, ItemResponse, QueryResponse};
use crate::data::fingerprint_file;
use crate::data::RetrievalConfig;
use crate::engine::Method;
use crate::error::Error;

/// Error body: `{"error": {"code": ..., "message": ...}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::Query(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_query"),
            Error::Config(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_config"),
            Error::Dimension { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "dimension_mismatch"),
            Error::TooLarge { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "too_large"),
            Error::UndefinedMetric(_) => (StatusCode::UNPROCESSABLE_ENTITY, "undefined_metric"),
            Error::Parse { .. } | Error::Format(_) | Error::Integrity(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "invalid_dataset")
            }
            Error::ModelMismatch(_) => (StatusCode::CONFLICT, "fingerprint_mismatch"),
            Error::Numerical(_) | Error::NonConvergence { .. } | Error::Connectivity { .. } => {
                (StatusCode::INTERNAL_SERVER_ERROR, "numerical_failure")
            }
            Error::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "io_error"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_body", r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_parameters", r.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, PartialEq)]
struct FileStamp {
    len: u64,
    modified: Option<SystemTime>,
}

fn stamp(path: &Path) -> Option<FileStamp> {
    let meta = std::fs::metadata(path).ok()?;
    Some(FileStamp {
        len: meta.len(),
        modified: meta.modified().ok(),
    })
}

struct Cached {
    loaded: Arc<LoadedModel>,
    stamp: Option<FileStamp>,
}

/// Shared service state: registry location, read-only loaded models and
/// per-model build locks.
pub struct AppState {
    data_dir: PathBuf,
    loaded: RwLock<HashMap<String, Cached>>,
    build_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(data_dir: impl Into<PathBuf>) -> Arc<Self> {
        Arc::new(Self {
            data_dir: data_dir.into(),
            loaded: RwLock::new(HashMap::new()),
            build_locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn data_dir(&self) -> &Path {
        &self.data_dir
    }

    fn cached(&self, id: &str, entry_path: &Path) -> Option<Arc<LoadedModel>> {
        let map = self.loaded.read().unwrap_or_else(|e| e.into_inner());
        let c = map.get(id)?;
        (c.stamp.is_some() && c.stamp == stamp(entry_path)).then(|| c.loaded.clone())
    }

    /// Loads a registered model, re-verifying the dataset fingerprint
    /// whenever the dataset file has changed on disk.
    async fn model(self: &Arc<Self>, id: &str) -> Result<Arc<LoadedModel>, ApiError> {
        let registry = ModelRegistry::open(&self.data_dir)?;
        let Some(entry) = registry.get(id).cloned() else {
            return Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_model", format!("no model {id:?}")));
        };
        if let Some(m) = self.cached(id, &entry.dataset_path) {
            return Ok(m);
        }
        let id = id.to_owned();
        let state = self.clone();
        blocking(move || {
            let before = stamp(&entry.dataset_path);
            let result = LoadedModel::load(&id, &entry).map(Arc::new);
            let mut map = state.loaded.write().unwrap_or_else(|e| e.into_inner());
            match &result {
                Ok(m) => {
                    map.insert(id, Cached { loaded: m.clone(), stamp: before });
                }
                Err(_) => {
                    map.remove(&id);
                }
            }
            result
        })
        .await
    }

    fn build_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.build_locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_owned()).or_default().clone()
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> crate::Result<T> + Send + 'static,
) -> Result<T, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError::from),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "task_failed", e.to_string())),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateModelRequest {
    pub dataset_path: PathBuf,
    #[serde(default)]
    pub config: RetrievalConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateModelResponse {
    pub model_id: String,
    pub dataset_fingerprint: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetrieveRequest {
    pub model_id: String,
    pub query_ids: Vec<String>,
    pub k: usize,
    #[serde(default = "default_method")]
    pub method: String,
    /// Required for, and only allowed with, `method = "scalarized"`.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

fn default_method() -> String {
    "pfm".into()
}

impl RetrieveRequest {
    pub fn parsed_method(&self) -> crate::Result<Method> {
        match (&self.weights, self.method.as_str()) {
            (Some(w), "scalarized") => Ok(Method::Scalarized(w.clone())),
            (Some(_), other) => Err(Error::Config(format!("weights given for method {other:?}"))),
            (None, other) => other.parse(),
        }
    }
}

#[derive(Debug, Deserialize)]
struct FrontsParams {
    queries: String,
    depth: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct ItemParams {
    model_id: Option<String>,
}

async fn create_model(
    State(state): State<Arc<AppState>>,
    body: Result<Json<CreateModelRequest>, JsonRejection>,
) -> ApiResult<CreateModelResponse> {
    let Json(req) = body?;
    if !req.dataset_path.is_file() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "dataset_unreadable",
            format!("{} is not a readable file", req.dataset_path.display()),
        ));
    }
    let path = req.dataset_path.clone();
    let fingerprint = blocking(move || fingerprint_file(path)).await?;
    let id = model_id(&fingerprint, &req.config, req.seed);
    let lock = state.build_lock(&id);
    let _guard = lock.lock().await;
    let data_dir = state.data_dir.clone();
    let (id, entry) =
        blocking(move || register_model(&data_dir, &req.dataset_path, &req.config, req.seed)).await?;
    Ok(Json(CreateModelResponse {
        model_id: id,
        dataset_fingerprint: entry.dataset_fingerprint,
        seed: entry.seed,
    }))
}

async fn retrieve_handler(
    State(state): State<Arc<AppState>>,
    body: Result<Json<RetrieveRequest>, JsonRejection>,
) -> ApiResult<QueryResponse> {
    let Json(req) = body?;
    let method = req.parsed_method()?;
    let model = state.model(&req.model_id).await?;
    let out = blocking(move || query_response(&model, &req.query_ids, &method, req.k)).await?;
    Ok(Json(out))
}

async fn fronts_handler(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    params: Result<Query<FrontsParams>, QueryRejection>,
) -> ApiResult<FrontsResponse> {
    let Query(params) = params?;
    let queries: Vec<String> = params
        .queries
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    let depth = params.depth.unwrap_or(1);
    let model = state.model(&id).await?;
    let out = blocking(move || fronts_response(&model, &queries, depth)).await?;
    Ok(Json(out))
}

/// Looks the item up in the given model's dataset, or else in each
/// registered model in id order.
async fn item_handler(
    State(state): State<Arc<AppState>>,
    UrlPath(item_id): UrlPath<String>,
    params: Result<Query<ItemParams>, QueryRejection>,
) -> ApiResult<ItemResponse> {
    let Query(params) = params?;
    let ids: Vec<String> = match params.model_id {
        Some(id) => vec![id],
        None => ModelRegistry::open(&state.data_dir)?.models.into_keys().collect(),
    };
    for id in ids {
        let model = state.model(&id).await?;
        let item = item_id.clone();
        if let Some(found) = blocking(move || item_response(&model, &item)).await? {
            return Ok(Json(found));
        }
    }
    Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_item", format!("no item {item_id:?}")))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/models", post(create_model))
        .route("/retrieve", post(retrieve_handler))
        .route("/fronts/{model_id}", get(fronts_handler))
        .route("/items/{item_id}", get(item_handler))
        .with_state(state)
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr, data_dir: PathBuf) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, data_dir = %data_dir.display(), "serving");
    axum::serve(listener, router(AppState::new(data_dir))).await
}
