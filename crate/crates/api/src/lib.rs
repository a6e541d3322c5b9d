//! HTTP service for the studio: scene revisions, object and generator
//! edits, single-instant shadow previews and simulation jobs.
//!
//! | Method | Path | |
//! |---|---|---|
//! | POST | `/scenes` | `{scene, meshes: {name: obj_text}}` → `{id, revision}` |
//! | GET | `/scenes/{id}[?revision=n]` | scene document and counts |
//! | PATCH | `/scenes/{id}/objects/{oid}` | transform / visibility → new revision |
//! | PATCH | `/scenes/{id}/generators/{gid}` | spec fields → new revision |
//! | GET | `/scenes/{id}/shadows?at=&generator=` | instant dump JSON |
//! | POST | `/scenes/{id}/jobs` | `{from, to, step, weather_mode, weather_csv?, revision?}` |
//! | GET | `/jobs/{jid}` | job record |
//! | GET | `/jobs/{jid}/report`, `/jobs/{jid}/heatmap` | CSV results |

mod error;
pub mod jobs;
pub mod scenes;
mod store;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::http::HeaderValue;
use axum::routing::{get, patch, post};
use axum::Router;
use chrono::Utc;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::ApiError;
use error::ApiResult;
use jobs::{Job, JobState};
use scenes::{build_scene, parse_meshes, Revision, SceneHistory};
pub use store::Store;

type SceneSlot = Arc<tokio::sync::Mutex<SceneHistory>>;

struct Inner {
    store: Store,
    scenes: RwLock<BTreeMap<String, SceneSlot>>,
    jobs: RwLock<BTreeMap<String, Arc<Job>>>,
    next_scene: AtomicU64,
    next_job: AtomicU64,
}

/// Shared service state; clones are cheap handles.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

fn numeric_suffix(id: &str) -> u64 {
    id.rsplit('-')
        .next()
        .and_then(|n| n.parse().ok())
        .unwrap_or(0)
}

impl AppState {
    /// Opens the data directory and reloads stored scenes and jobs. Jobs
    /// that were still queued or running are marked failed.
    pub fn open(data_dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let store = Store::open(data_dir)?;
        let mut scenes = BTreeMap::new();
        for stored in store.load_scenes()? {
            let bad = |e: ApiError| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("scene {}: {}", stored.id, e.error),
                )
            };
            let meshes = Arc::new(parse_meshes(&stored.meshes).map_err(bad)?);
            let mut revisions = Vec::new();
            for (i, document) in stored.revisions.into_iter().enumerate() {
                let scene = build_scene(&document, &meshes, "").map_err(bad)?;
                revisions.push(Arc::new(Revision {
                    number: i as u64 + 1,
                    document,
                    scene: Arc::new(scene),
                }));
            }
            scenes.insert(
                stored.id.clone(),
                Arc::new(tokio::sync::Mutex::new(SceneHistory { meshes, revisions })),
            );
        }
        let mut jobs = BTreeMap::new();
        for mut record in store.load_jobs()? {
            if record.state < JobState::Done {
                record.state = JobState::Failed;
                record.error = Some("interrupted by a service restart".into());
                record.finished = Some(Utc::now());
                store.save_job(&record)?;
            }
            jobs.insert(record.id.clone(), Arc::new(Job::new(record)));
        }
        let next_scene = scenes.keys().map(|k| numeric_suffix(k)).max().unwrap_or(0) + 1;
        let next_job = jobs.keys().map(|k| numeric_suffix(k)).max().unwrap_or(0) + 1;
        Ok(Self(Arc::new(Inner {
            store,
            scenes: RwLock::new(scenes),
            jobs: RwLock::new(jobs),
            next_scene: AtomicU64::new(next_scene),
            next_job: AtomicU64::new(next_job),
        })))
    }

    pub fn store(&self) -> &Store {
        &self.0.store
    }

    fn next_scene_id(&self) -> String {
        format!("scene-{}", self.0.next_scene.fetch_add(1, Ordering::SeqCst))
    }

    fn next_job_id(&self) -> String {
        format!("job-{}", self.0.next_job.fetch_add(1, Ordering::SeqCst))
    }

    fn insert_scene(&self, id: &str, history: SceneHistory) {
        self.0
            .scenes
            .write()
            .unwrap()
            .insert(id.to_string(), Arc::new(tokio::sync::Mutex::new(history)));
    }

    /// Per-scene lock; edits hold it while building and storing a revision.
    fn scene(&self, id: &str) -> ApiResult<SceneSlot> {
        self.0
            .scenes
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no scene `{id}`")))
    }

    fn insert_job(&self, job: Arc<Job>) {
        let id = job.snapshot().id;
        self.0.jobs.write().unwrap().insert(id, job);
    }

    fn job(&self, id: &str) -> ApiResult<Arc<Job>> {
        self.0
            .jobs
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no job `{id}`")))
    }
}

/// Routes with CORS for `origin` (any origin when `None`).
pub fn router(state: AppState, origin: Option<HeaderValue>) -> Router {
    let cors = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    let cors = match origin {
        Some(o) => cors.allow_origin(AllowOrigin::exact(o)),
        None => cors.allow_origin(Any),
    };
    Router::new()
        .route("/scenes", post(scenes::create))
        .route("/scenes/{id}", get(scenes::get))
        .route("/scenes/{id}/objects/{oid}", patch(scenes::patch_object))
        .route(
            "/scenes/{id}/generators/{gid}",
            patch(scenes::patch_generator),
        )
        .route("/scenes/{id}/shadows", get(scenes::shadows))
        .route("/scenes/{id}/jobs", post(jobs::create))
        .route("/jobs/{id}", get(jobs::get))
        .route("/jobs/{id}/report", get(jobs::report))
        .route("/jobs/{id}/heatmap", get(jobs::heatmap))
        .layer(cors)
        .with_state(state)
}
