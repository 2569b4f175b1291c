//! REST service for interactive profile scrutiny.
//!
//! A browser client (or curl) lists users, reads and edits their profiles,
//! injects a short-term preference, and asks for a next-POI prediction on
//! one of the user's trajectories. Splits and datasets are read-only here;
//! the only mutable state is the profile store, guarded by optimistic
//! versioning: every write names the version it read, and a mismatch is
//! rejected with 409 so a concurrent editor never silently loses work.
//!
//! Routes:
//!   GET  /users
//!   GET  /users/{id}/profile
//!   PUT  /users/{id}/profile            {version, profile}
//!   POST /users/{id}/inject-preference  {category}
//!   POST /users/{id}/predict            {trajectory_id}
//!   GET  /users/{id}/trajectories

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path as AxPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::backend::{build_chat_backend, ChatBackend};
use crate::error::{Error, Result};
use crate::eval::parse_prediction;
use crate::ingest::read_dataset;
use crate::pipeline::{OutputLayout, PipelineConfig};
use crate::profiler::store::{ProfileStore, StoredProfile};
use crate::profiler::UserProfile;
use crate::promptgen::{build_sft_example, inject_preference, ChatTemplate, SystemPromptConfig};
use crate::sessionize::{read_trajectories_jsonl, Trajectory};

pub struct AppState {
    store: ProfileStore,
    trajectories: BTreeMap<u64, Trajectory>,
    by_user: BTreeMap<u64, Vec<u64>>,
    poi_count: u64,
    poi_categories: BTreeMap<u64, String>,
    predictor: Arc<dyn ChatBackend>,
    prompt: SystemPromptConfig,
    template: ChatTemplate,
}

/// Load service state from a pipeline's artifacts: the profile store, the
/// sessionized trajectories, and the dataset's POI vocabulary.
pub fn build_state(cfg: &PipelineConfig) -> Result<AppState> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let missing = |path: std::path::PathBuf| Error::MissingArtifact { path, stage: "serve" };
    if !layout.profiles_dir().exists() {
        return Err(missing(layout.profiles_dir()));
    }
    if !layout.trajectories_jsonl().exists() {
        return Err(missing(layout.trajectories_jsonl()));
    }
    if !layout.checkins_jsonl().exists() {
        return Err(missing(layout.checkins_jsonl()));
    }
    let store = ProfileStore::open(&layout.profiles_dir())?;
    let dataset = read_dataset(&layout.checkins_jsonl(), &layout.dataset_index())?;
    let mut trajectories = BTreeMap::new();
    let mut by_user: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for t in read_trajectories_jsonl(&layout.trajectories_jsonl())? {
        by_user.entry(t.user_id).or_default().push(t.traj_id);
        trajectories.insert(t.traj_id, t);
    }
    Ok(AppState {
        store,
        trajectories,
        by_user,
        poi_count: dataset.m,
        poi_categories: dataset.poi_categories(),
        predictor: build_chat_backend(&cfg.backends.predictor)?,
        prompt: cfg.prompt.system(),
        template: cfg.prompt.chat_template,
    })
}

/// JSON error body; the HTTP status carries the class.
#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub current_version: Option<u32>,
}

struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, current_version) = match &self.0 {
            Error::UnknownUser(_) | Error::UnknownTrajectory(_) => (StatusCode::NOT_FOUND, None),
            Error::StaleVersion { current, .. } => (StatusCode::CONFLICT, Some(*current)),
            Error::EmptyCategory
            | Error::UserMismatch(_, _)
            | Error::TrajectoryTooShort(_)
            | Error::InvalidProfile(_)
            | Error::InvalidPromptConfig(_) => (StatusCode::BAD_REQUEST, None),
            Error::Backend(_) => (StatusCode::BAD_GATEWAY, None),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, None),
        };
        let body = ErrorBody { error: self.0.to_string(), current_version };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VersionedProfile {
    pub version: u32,
    pub profile: UserProfile,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InjectRequest {
    pub category: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictRequest {
    pub trajectory_id: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictResponse {
    pub raw_output: String,
    pub parsed_poi_id: Option<u64>,
    pub category_name: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub traj_id: u64,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub checkins: usize,
}

async fn list_users(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<u64>>> {
    Ok(Json(state.store.users()?))
}

fn load_versioned(state: &AppState, user_id: u64) -> Result<VersionedProfile> {
    let stored = state.store.load(user_id)?;
    Ok(VersionedProfile { version: stored.version, profile: stored.to_profile() })
}

async fn get_profile(
    State(state): State<Arc<AppState>>,
    AxPath(user_id): AxPath<u64>,
) -> ApiResult<Json<VersionedProfile>> {
    Ok(Json(load_versioned(&state, user_id)?))
}

async fn put_profile(
    State(state): State<Arc<AppState>>,
    AxPath(user_id): AxPath<u64>,
    Json(body): Json<VersionedProfile>,
) -> ApiResult<Json<VersionedProfile>> {
    if body.profile.user_id != user_id {
        return Err(Error::UserMismatch(user_id, body.profile.user_id).into());
    }
    // Manual edits carry no generation metadata: zero attempts, no sampler.
    let stored = StoredProfile::from_profile(&body.profile, 0, 0.0, false);
    let version = state.store.append(&stored, Some(body.version))?;
    Ok(Json(VersionedProfile { version, profile: body.profile }))
}

async fn inject(
    State(state): State<Arc<AppState>>,
    AxPath(user_id): AxPath<u64>,
    Json(body): Json<InjectRequest>,
) -> ApiResult<Json<VersionedProfile>> {
    let current = state.store.load(user_id)?;
    let injected = inject_preference(&current.to_profile(), &body.category)?;
    let stored = StoredProfile::from_profile(&injected, 0, 0.0, false);
    let version = state.store.append(&stored, Some(current.version))?;
    Ok(Json(VersionedProfile { version, profile: injected }))
}

async fn predict(
    State(state): State<Arc<AppState>>,
    AxPath(user_id): AxPath<u64>,
    Json(body): Json<PredictRequest>,
) -> ApiResult<Json<PredictResponse>> {
    let stored = state.store.load(user_id)?;
    let traj = state
        .trajectories
        .get(&body.trajectory_id)
        .filter(|t| t.user_id == user_id)
        .ok_or(Error::UnknownTrajectory(body.trajectory_id))?
        .clone();
    let example = build_sft_example(
        0,
        &traj,
        &stored.to_profile(),
        &state.prompt,
        state.poi_count,
        state.template,
    )?;

    let predictor = state.predictor.clone();
    let poi_count = state.poi_count;
    let raw_output = tokio::task::spawn_blocking(move || {
        let mut messages = Vec::new();
        if !example.system_prompt.is_empty() {
            messages.push(crate::backend::ChatMessage::system(&example.system_prompt));
        }
        messages.push(crate::backend::ChatMessage::user(&example.input_prompt));
        let request = crate::backend::ChatRequest {
            messages,
            temperature: 0.0,
            max_tokens: 128,
            json_mode: false,
        };
        predictor.complete(&request)
    })
    .await
    .map_err(|e| Error::InvalidConfig(format!("prediction task failed: {e}")))?
    .map_err(Error::from)?;

    let parsed_poi_id = parse_prediction(&raw_output, poi_count);
    let category_name = parsed_poi_id.and_then(|id| state.poi_categories.get(&id).cloned());
    Ok(Json(PredictResponse { raw_output, parsed_poi_id, category_name }))
}

async fn list_trajectories(
    State(state): State<Arc<AppState>>,
    AxPath(user_id): AxPath<u64>,
) -> ApiResult<Json<Vec<TrajectorySummary>>> {
    // Users without stored profiles are unknown to the service.
    state.store.load(user_id)?;
    let ids = state.by_user.get(&user_id).cloned().unwrap_or_default();
    let summaries = ids
        .iter()
        .map(|id| {
            let t = &state.trajectories[id];
            TrajectorySummary {
                traj_id: t.traj_id,
                start: t.start,
                end: t.end,
                checkins: t.len(),
            }
        })
        .collect();
    Ok(Json(summaries))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/users", get(list_users))
        .route("/users/{id}/profile", get(get_profile).put(put_profile))
        .route("/users/{id}/inject-preference", post(inject))
        .route("/users/{id}/predict", post(predict))
        .route("/users/{id}/trajectories", get(list_trajectories))
        .with_state(state)
}

/// Serve until the process is killed. Binds before blocking so startup
/// errors (port in use, missing artifacts) surface synchronously.
pub fn serve_blocking(cfg: &PipelineConfig, addr: SocketAddr) -> Result<()> {
    let state = Arc::new(build_state(cfg)?);
    let listener = std::net::TcpListener::bind(addr)
        .map_err(|e| Error::InvalidConfig(format!("cannot bind {addr}: {e}")))?;
    listener
        .set_nonblocking(true)
        .map_err(|e| Error::InvalidConfig(format!("cannot configure listener: {e}")))?;
    log::info!("serving on {}", listener.local_addr().unwrap());
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Error::InvalidConfig(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::from_std(listener)
            .map_err(|e| Error::InvalidConfig(format!("cannot register listener: {e}")))?;
        axum::serve(listener, router(state))
            .await
            .map_err(|e| Error::InvalidConfig(format!("server failed: {e}")))
    })
}
