//! HTTP service over in-memory sessions.
//!
//! | method | path                     | body / query                         | response |
//! |--------|--------------------------|--------------------------------------|----------|
//! | POST   | `/volumes`               | attached NRRD volume                 | session metadata |
//! | GET    | `/volumes/{id}`          |                                      | session metadata |
//! | DELETE | `/volumes/{id}`          |                                      | 204 |
//! | GET    | `/volumes/{id}/slice`    | `axis`, `index`, `overlay`           | PNG |
//! | GET    | `/volumes/{id}/seeds`    |                                      | seeds document |
//! | POST   | `/volumes/{id}/strokes`  | `{"strokes": [...]}`                 | seed counts |
//! | POST   | `/volumes/{id}/segment`  | engine overrides (optional)          | run statistics |
//! | POST   | `/volumes/{id}/morph`    | `{"op", "connectivity", "radius"}`   | mask revision |
//! | POST   | `/volumes/{id}/metrics`  | attached NRRD reference mask, `mode` | evaluation report |
//! | GET    | `/volumes/{id}/mask`     |                                      | attached NRRD mask |
//!
//! Errors carry `{"code", "message"}`. Each session sits behind its own
//! read/write lock, so mutations on a session are serialized and every
//! mutation bumps the revision by one.

pub mod render;
pub mod strokes;

use std::collections::HashMap;
use std::future::Future;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::RwLock;

use growcut_core::metrics::{evaluate, HausdorffMode};
use growcut_core::volume::SampleType;
use growcut_core::{Axis, BinaryMask, Connectivity, Error as CoreError, GrowCutConfig, Label, SeedSet, VolumeGrid};

use crate::io::json::{seeds_to_json, AxisName};
use crate::io::{self, mask_to_raw, nrrd, parse_sample_type, sample_type_name, volume_to_raw};
use crate::job::{apply_morph, timed_run, EngineOverrides, MorphOp};
use crate::report::ReportDoc;
use render::{render_png, OverlayData};
use strokes::{rasterize, StrokeBatch};

/// Largest accepted request body.
pub const MAX_BODY_BYTES: usize = 1 << 30;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl ToString) -> Self {
        Self {
            status,
            code,
            message: message.to_string(),
        }
    }

    fn bad_request(code: &'static str, message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(message: impl ToString) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"code": self.code, "message": self.message}))).into_response()
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::MissingLabel(_) | CoreError::EmptySeeds => {
                return Self::new(StatusCode::CONFLICT, "seeds_incomplete", e);
            }
            CoreError::DimsMismatch { .. } => "dims_mismatch",
            CoreError::SliceOutOfRange { .. } => "index_out_of_range",
            CoreError::EmptyMask | CoreError::UndefinedMeasure(_) => "undefined_measure",
            _ => "invalid_input",
        };
        Self::bad_request(code, e)
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct Session {
    pub id: String,
    pub volume: VolumeGrid,
    pub sample_type: SampleType,
    pub seeds: SeedSet,
    pub mask: Option<BinaryMask>,
    pub config: GrowCutConfig,
    pub revision: u64,
}

impl Session {
    fn new(id: String, volume: VolumeGrid, sample_type: SampleType) -> Self {
        Self {
            id,
            volume,
            sample_type,
            seeds: SeedSet::new(),
            mask: None,
            config: default_config(),
            revision: 0,
        }
    }

    fn metadata(&self) -> Value {
        json!({
            "id": self.id,
            "dims": self.volume.dims().as_array(),
            "spacing": self.volume.spacing().0,
            "dtype": sample_type_name(self.sample_type),
            "revision": self.revision,
            "foreground_seeds": self.seeds.count(Label::Foreground),
            "background_seeds": self.seeds.count(Label::Background),
            "mask_voxels": self.mask.as_ref().map(BinaryMask::count),
        })
    }

    fn require_mask(&self) -> ApiResult<&BinaryMask> {
        self.mask
            .as_ref()
            .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no_mask", "session has no mask yet; run segment first"))
    }
}

fn default_config() -> GrowCutConfig {
    GrowCutConfig {
        thread_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..GrowCutConfig::default()
    }
}

#[derive(Serialize, Deserialize)]
struct SessionFile {
    revision: u64,
    dtype: String,
    config: EngineOverrides,
}

/// Directory-backed copies of the sessions, one sub-directory per id holding
/// `volume.nrrd`, `seeds.json`, `mask.nrrd` and `session.json`.
struct Store {
    dir: PathBuf,
}

impl Store {
    fn session_dir(&self, id: &str) -> PathBuf {
        self.dir.join(id)
    }

    fn save_volume(&self, s: &Session) -> io::Result<()> {
        let dir = self.session_dir(&s.id);
        std::fs::create_dir_all(&dir).map_err(|source| io::IoError::File {
            path: dir.clone(),
            source,
        })?;
        io::write_raw(&dir.join("volume.nrrd"), &volume_to_raw(&s.volume, s.sample_type))
    }

    fn save_state(&self, s: &Session) -> io::Result<()> {
        let dir = self.session_dir(&s.id);
        io::write_seeds(&dir.join("seeds.json"), &s.seeds)?;
        let mask_path = dir.join("mask.nrrd");
        match &s.mask {
            Some(m) => io::write_mask(&mask_path, m, s.volume.spacing())?,
            None if mask_path.exists() => std::fs::remove_file(&mask_path).map_err(|source| io::IoError::File {
                path: mask_path.clone(),
                source,
            })?,
            None => {}
        }
        let c = &s.config;
        let file = SessionFile {
            revision: s.revision,
            dtype: sample_type_name(s.sample_type).into(),
            config: EngineOverrides {
                connectivity: Some(c.connectivity.count()),
                margin: Some(c.margin_fraction),
                max_iterations: c.max_iterations,
                threads: Some(c.thread_count),
                distance_cache: Some(c.distance_cache),
                tile_size: Some(c.tile_size),
            },
        };
        let text = serde_json::to_string_pretty(&file).expect("session file serializes");
        io::write_file(&dir.join("session.json"), text.as_bytes())
    }

    fn remove(&self, id: &str) {
        let _ = std::fs::remove_dir_all(self.session_dir(id));
    }

    fn load(&self, dir: &FsPath) -> Result<Session, String> {
        let id = dir.file_name().and_then(|n| n.to_str()).ok_or("bad directory name")?.to_string();
        let text = std::fs::read_to_string(dir.join("session.json")).map_err(|e| e.to_string())?;
        let file: SessionFile = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let (volume, _) = io::read_volume(&dir.join("volume.nrrd")).map_err(|e| e.to_string())?;
        let sample_type = parse_sample_type(&file.dtype).ok_or("bad dtype")?;
        let seeds = io::read_seeds(&dir.join("seeds.json")).map_err(|e| e.to_string())?;
        seeds.validate_bounds(volume.dims()).map_err(|e| e.to_string())?;
        let mask_path = dir.join("mask.nrrd");
        let mask = if mask_path.exists() {
            let (m, _) = io::read_mask(&mask_path).map_err(|e| e.to_string())?;
            Some(m)
        } else {
            None
        };
        let config = file.config.apply(&default_config()).map_err(|e| e.to_string())?;
        Ok(Session {
            id,
            volume,
            sample_type,
            seeds,
            mask,
            config,
            revision: file.revision,
        })
    }
}

pub struct AppState {
    sessions: std::sync::RwLock<HashMap<String, Arc<RwLock<Session>>>>,
    store: Option<Store>,
}

impl AppState {
    /// Sessions found under `data_dir` are restored; unreadable ones are
    /// skipped with a warning.
    pub fn new(data_dir: Option<PathBuf>) -> std::io::Result<Self> {
        let mut sessions = HashMap::new();
        let store = match data_dir {
            Some(dir) => {
                std::fs::create_dir_all(&dir)?;
                let store = Store { dir };
                for entry in std::fs::read_dir(&store.dir)? {
                    let path = entry?.path();
                    if !path.is_dir() {
                        continue;
                    }
                    match store.load(&path) {
                        Ok(s) => {
                            log::info!("restored session {}", s.id);
                            sessions.insert(s.id.clone(), Arc::new(RwLock::new(s)));
                        }
                        Err(e) => log::warn!("skipping {}: {e}", path.display()),
                    }
                }
                Some(store)
            }
            None => None,
        };
        Ok(Self {
            sessions: std::sync::RwLock::new(sessions),
            store,
        })
    }

    fn session(&self, id: &str) -> ApiResult<Arc<RwLock<Session>>> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_session", format!("no session '{id}'")))
    }

    fn persist(&self, s: &Session) -> ApiResult<()> {
        match &self.store {
            Some(store) => store
                .save_state(s)
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "persistence_failed", e)),
            None => Ok(()),
        }
    }
}

type AppHandle = Arc<AppState>;

pub fn router(app: AppHandle) -> Router {
    Router::new()
        .route("/volumes", post(upload_volume))
        .route("/volumes/{id}", get(session_info).delete(delete_session))
        .route("/volumes/{id}/slice", get(get_slice))
        .route("/volumes/{id}/seeds", get(get_seeds))
        .route("/volumes/{id}/strokes", post(post_strokes))
        .route("/volumes/{id}/segment", post(post_segment))
        .route("/volumes/{id}/morph", post(post_morph))
        .route("/volumes/{id}/metrics", post(post_metrics))
        .route("/volumes/{id}/mask", get(get_mask))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(app)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: AppHandle,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(app)).with_graceful_shutdown(shutdown).await
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

fn parse_body<T: serde::de::DeserializeOwned + Default>(body: &[u8]) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_json", e))
}

async fn upload_volume(State(app): State<AppHandle>, body: Bytes) -> ApiResult<Json<Value>> {
    let raw = blocking(move || nrrd::parse(&body, None).map_err(|e| ApiError::bad_request("invalid_volume", e))).await?;
    let sample_type = raw.sample_type;
    let volume = raw.into_volume().map_err(|e| ApiError::bad_request("invalid_volume", e))?;
    let session = Session::new(uuid::Uuid::new_v4().simple().to_string(), volume, sample_type);
    if let Some(store) = &app.store {
        store
            .save_volume(&session)
            .and_then(|_| store.save_state(&session))
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "persistence_failed", e))?;
    }
    let meta = session.metadata();
    log::info!("created session {}", session.id);
    app.sessions
        .write()
        .expect("session map lock")
        .insert(session.id.clone(), Arc::new(RwLock::new(session)));
    Ok(Json(meta))
}

async fn session_info(State(app): State<AppHandle>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = app.session(&id)?;
    let s = s.read().await;
    Ok(Json(s.metadata()))
}

async fn delete_session(State(app): State<AppHandle>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let handle = app.session(&id)?;
    // Wait for in-flight work on the session before dropping it.
    let _guard = handle.write().await;
    app.sessions.write().expect("session map lock").remove(&id);
    if let Some(store) = &app.store {
        store.remove(&id);
    }
    Ok(StatusCode::NO_CONTENT)
}

fn parse_axis(s: &str) -> ApiResult<Axis> {
    let name: AxisName = serde_json::from_value(Value::String(s.into()))
        .map_err(|_| ApiError::bad_request("invalid_axis", format!("axis '{s}' is not axial, sagittal or coronal")))?;
    Ok(name.into())
}

fn parse_mode(q: &HashMap<String, String>) -> ApiResult<HausdorffMode> {
    match q.get("mode").map(String::as_str) {
        None | Some("full-set") => Ok(HausdorffMode::FullSet),
        Some("boundary") => Ok(HausdorffMode::Boundary),
        Some(other) => Err(ApiError::bad_request(
            "invalid_mode",
            format!("mode '{other}' is not full-set or boundary"),
        )),
    }
}

async fn get_slice(
    State(app): State<AppHandle>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let handle = app.session(&id)?;
    let axis = parse_axis(q.get("axis").map_or("axial", String::as_str))?;
    let index: usize = q
        .get("index")
        .ok_or_else(|| ApiError::bad_request("missing_index", "query parameter 'index' is required"))?
        .parse()
        .map_err(|_| ApiError::bad_request("index_out_of_range", "index must be a non-negative integer"))?;
    let overlay = q.get("overlay").map_or("none", String::as_str).to_string();
    if !matches!(overlay.as_str(), "none" | "seeds" | "mask") {
        return Err(ApiError::bad_request(
            "invalid_overlay",
            format!("overlay '{overlay}' is not none, seeds or mask"),
        ));
    }
    let guard = handle.read_owned().await;
    let png = blocking(move || {
        let s = &*guard;
        let data = match overlay.as_str() {
            "seeds" => OverlayData::Seeds(&s.seeds),
            "mask" => OverlayData::Mask(s.require_mask()?),
            _ => OverlayData::None,
        };
        Ok(render_png(&s.volume, axis, index, data)?)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn get_seeds(State(app): State<AppHandle>, Path(id): Path<String>) -> ApiResult<Response> {
    let handle = app.session(&id)?;
    let s = handle.read().await;
    Ok(([(header::CONTENT_TYPE, "application/json")], seeds_to_json(&s.seeds)).into_response())
}

async fn post_strokes(State(app): State<AppHandle>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let handle = app.session(&id)?;
    let batch: StrokeBatch = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("invalid_json", e))?;
    let mut s = handle.write().await;
    let dims = s.volume.dims();
    // Rasterize everything before touching the seed set.
    let mut painted = Vec::with_capacity(batch.strokes.len());
    for (i, stroke) in batch.strokes.iter().enumerate() {
        let voxels = rasterize(stroke, dims).map_err(|m| ApiError::bad_request("invalid_stroke", format!("stroke {i}: {m}")))?;
        painted.push((voxels, Label::from(stroke.label)));
    }
    let painted_voxels: usize = painted.iter().map(|p| p.0.len()).sum();
    for (voxels, label) in painted {
        for v in voxels {
            s.seeds.insert(v, label);
        }
    }
    s.revision += 1;
    app.persist(&s)?;
    Ok(Json(json!({
        "revision": s.revision,
        "painted_voxels": painted_voxels,
        "seed_count": s.seeds.len(),
        "foreground_seeds": s.seeds.count(Label::Foreground),
        "background_seeds": s.seeds.count(Label::Background),
    })))
}

async fn post_segment(State(app): State<AppHandle>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let handle = app.session(&id)?;
    let overrides: EngineOverrides = parse_body(&body)?;
    let mut guard = handle.write_owned().await;
    let app2 = app.clone();
    blocking(move || {
        let s = &mut *guard;
        let config = overrides.apply(&s.config)?;
        s.seeds.validate_for_segmentation(s.volume.dims())?;
        let (seg, stats) = timed_run(&s.volume, &s.seeds, &config)?;
        s.config = config;
        s.mask = Some(seg.mask);
        s.revision += 1;
        app2.persist(s)?;
        let mut out = serde_json::to_value(&stats).expect("stats serialize");
        out["revision"] = json!(s.revision);
        Ok(Json(out))
    })
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MorphRequest {
    op: MorphOp,
    #[serde(default = "default_connectivity")]
    connectivity: u32,
    #[serde(default = "default_radius")]
    radius: u32,
}

fn default_connectivity() -> u32 {
    26
}

fn default_radius() -> u32 {
    1
}

async fn post_morph(State(app): State<AppHandle>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let handle = app.session(&id)?;
    let req: MorphRequest = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("invalid_json", e))?;
    let connectivity = Connectivity::from_count(req.connectivity)?;
    let mut guard = handle.write_owned().await;
    let app2 = app.clone();
    blocking(move || {
        let s = &mut *guard;
        let out = apply_morph(s.require_mask()?, req.op, connectivity, req.radius)?;
        let count = out.count();
        s.mask = Some(out);
        s.revision += 1;
        app2.persist(s)?;
        Ok(Json(json!({"revision": s.revision, "foreground_voxels": count})))
    })
    .await
}

/// `A` is the session mask, `R` the uploaded reference; volumes use the
/// session volume's spacing.
async fn post_metrics(
    State(app): State<AppHandle>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> ApiResult<Json<ReportDoc>> {
    let handle = app.session(&id)?;
    let mode = parse_mode(&q)?;
    let guard = handle.read_owned().await;
    blocking(move || {
        let s = &*guard;
        let a = s.require_mask()?;
        let r = nrrd::parse(&body, None)
            .and_then(|raw| raw.into_mask())
            .map_err(|e| ApiError::bad_request("invalid_mask", e))?;
        let report = evaluate(a, &r, s.volume.spacing(), mode)?;
        Ok(Json(ReportDoc::new(&report, mode)))
    })
    .await
}

async fn get_mask(State(app): State<AppHandle>, Path(id): Path<String>) -> ApiResult<Response> {
    let handle = app.session(&id)?;
    let s = handle.read().await;
    let bytes = nrrd::encode_attached(&mask_to_raw(s.require_mask()?, s.volume.spacing()));
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], bytes).into_response())
}
