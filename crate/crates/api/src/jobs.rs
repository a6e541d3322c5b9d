//! Simulation jobs: a period run over one scene revision, executed off the
//! request path, with results stored next to the job record.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::Json;
use chrono::{DateTime, Utc};
use helios_core::sim::{
    parse_instant, parse_step, simulate_period, weather_source, PeriodRequest, RunParams,
};
use helios_core::solar::WeatherSource;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::scenes::Revision;
use crate::store::{HEATMAP_FILE, REPORT_FILE};
use crate::AppState;

/// Job lifecycle; states only move forward in this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub scene_id: String,
    pub revision: u64,
    pub params: RunParams,
    pub state: JobState,
    /// Share of daylight steps evaluated, in [0, 1].
    pub progress: f64,
    pub created: DateTime<Utc>,
    pub finished: Option<DateTime<Utc>>,
    pub loss_fraction: Option<f64>,
    pub error: Option<String>,
}

pub struct Job {
    record: Mutex<JobRecord>,
    done: AtomicUsize,
    total: AtomicUsize,
}

impl Job {
    pub fn new(record: JobRecord) -> Self {
        Self {
            record: Mutex::new(record),
            done: AtomicUsize::new(0),
            total: AtomicUsize::new(0),
        }
    }

    pub fn snapshot(&self) -> JobRecord {
        let mut r = self.record.lock().unwrap().clone();
        let total = self.total.load(Ordering::Relaxed);
        if r.state == JobState::Running && total > 0 {
            r.progress = self.done.load(Ordering::Relaxed) as f64 / total as f64;
        }
        r
    }

    /// Moves to `state` and applies `update`; returns the new record.
    fn advance(&self, state: JobState, update: impl FnOnce(&mut JobRecord)) -> JobRecord {
        let mut r = self.record.lock().unwrap();
        assert!(
            state > r.state,
            "job {} cannot go from {:?} to {state:?}",
            r.id,
            r.state
        );
        r.state = state;
        update(&mut r);
        r.clone()
    }
}

#[derive(Debug, Deserialize)]
pub struct JobRequest {
    #[serde(flatten)]
    pub params: RunParams,
    /// Weather CSV text for the `tmy` and `measured` modes.
    #[serde(default)]
    pub weather_csv: Option<String>,
    /// Scene revision to run on; the latest when absent.
    #[serde(default)]
    pub revision: Option<u64>,
}

fn check_params(req: &JobRequest) -> ApiResult<(PeriodRequest<'static>, Box<dyn WeatherSource>)> {
    let p = &req.params;
    let from = parse_instant(&p.from).map_err(|e| ApiError::invalid("from", e.to_string()))?;
    let to = parse_instant(&p.to).map_err(|e| ApiError::invalid("to", e.to_string()))?;
    let step = parse_step(&p.step).map_err(|e| ApiError::invalid("step", e.to_string()))?;
    if from >= to {
        return Err(ApiError::invalid("to", format!("{to} is not after {from}")));
    }
    let source = weather_source(p.weather_mode, req.weather_csv.as_deref())
        .map_err(|e| ApiError::invalid("weather_csv", e.to_string()))?;
    Ok((PeriodRequest::new(from, to, step), source))
}

fn run(
    app: &AppState,
    job: &Job,
    rev: &Revision,
    request: PeriodRequest,
    source: &dyn WeatherSource,
) {
    let store = app.store();
    let id = job.snapshot().id;
    let persist = |r: &JobRecord| {
        if let Err(e) = store.save_job(r) {
            log::error!("job {id}: cannot save record: {e}");
        }
    };
    persist(&job.advance(JobState::Running, |_| {}));
    let progress = |n: usize, total: usize| {
        job.total.store(total, Ordering::Relaxed);
        job.done.store(n, Ordering::Relaxed);
    };
    let request = PeriodRequest {
        progress: Some(&progress),
        ..request
    };
    let outcome = simulate_period(&rev.scene, source, &request)
        .map_err(|e| e.to_string())
        .and_then(|result| {
            store
                .save_job_file(&id, REPORT_FILE, result.report.to_csv().as_bytes())
                .map_err(|e| e.to_string())?;
            store
                .save_job_file(&id, HEATMAP_FILE, result.heatmap.to_csv().as_bytes())
                .map_err(|e| e.to_string())?;
            Ok(result.report.total().loss_fraction())
        });
    let record = match outcome {
        Ok(loss) => job.advance(JobState::Done, |r| {
            r.progress = 1.0;
            r.loss_fraction = Some(loss);
            r.finished = Some(Utc::now());
        }),
        Err(e) => job.advance(JobState::Failed, |r| {
            r.error = Some(e);
            r.finished = Some(Utc::now());
        }),
    };
    persist(&record);
}

pub async fn create(
    State(app): State<AppState>,
    Path(scene_id): Path<String>,
    body: axum::body::Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: JobRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::invalid("body", e.to_string()))?;
    let (request, source) = check_params(&req)?;
    let rev = {
        let history = app.scene(&scene_id)?;
        let history = history.lock().await;
        match req.revision {
            Some(n) => history.get(n).ok_or_else(|| {
                ApiError::not_found(format!("scene `{scene_id}` has no revision {n}"))
            })?,
            None => history.latest(),
        }
    };
    let record = JobRecord {
        id: app.next_job_id(),
        scene_id,
        revision: rev.number,
        params: req.params,
        state: JobState::Queued,
        progress: 0.0,
        created: Utc::now(),
        finished: None,
        loss_fraction: None,
        error: None,
    };
    app.store().save_job(&record).map_err(ApiError::internal)?;
    let job = Arc::new(Job::new(record.clone()));
    app.insert_job(job.clone());
    let worker = app.clone();
    tokio::task::spawn_blocking(move || run(&worker, &job, &rev, request, source.as_ref()));
    Ok((StatusCode::ACCEPTED, Json(record)))
}

pub async fn get(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<JobRecord>> {
    Ok(Json(app.job(&id)?.snapshot()))
}

async fn result_file(app: &AppState, id: &str, name: &'static str) -> ApiResult<impl IntoResponse> {
    let record = app.job(id)?.snapshot();
    if record.state != JobState::Done {
        return Err(ApiError::conflict(
            format!("job `{id}` is {:?}", record.state).to_lowercase(),
        ));
    }
    let bytes = app
        .store()
        .read_job_file(id, name)
        .map_err(ApiError::internal)?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], bytes))
}

pub async fn report(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    result_file(&app, &id, REPORT_FILE).await
}

pub async fn heatmap(
    State(app): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    result_file(&app, &id, HEATMAP_FILE).await
}
