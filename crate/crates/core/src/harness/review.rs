//! HTTP review service for human rating of creative samples.
//!
//! Raters never see another rater's judgment for a sample until they have
//! submitted their own.

use std::io::Write;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::benchmark::BenchmarkKind;
use crate::llm::prompt_for;
use crate::render::Verdict;

use super::ratings::{resolutions, Judgment, RatingError, RatingRecord, Resolution};
use super::run::{load_run, Run, RATINGS_FILE};
use super::sample::{GenerationSample, WellFormed};
use super::HarnessError;

type Shared = Arc<Mutex<Run>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub id: String,
    pub category: String,
    pub benchmark: String,
    pub benchmark_name: String,
    pub index: usize,
    pub kind: BenchmarkKind,
    pub wellformed: WellFormed,
    pub node_count: Option<usize>,
    /// `pass`, `fail`, `needs-human`, `not-well-formed`, `unchecked` or
    /// `error`.
    pub status: String,
    /// Human outcome, for samples awaiting human judgment.
    pub resolution: Option<Resolution>,
    /// Whether the requesting rater has judged this sample.
    pub judged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDetail {
    #[serde(flatten)]
    pub summary: SampleSummary,
    pub reference: String,
    pub prompt: String,
    pub code: String,
    pub patch: Option<Value>,
    pub verdict: Option<Verdict>,
    pub my_rating: Option<RatingRecord>,
    /// Every rating for the sample; present only once the requesting rater
    /// has submitted a judgment.
    pub ratings: Option<Vec<RatingRecord>>,
}

pub fn status_of(s: &GenerationSample) -> &'static str {
    match s.wellformed {
        WellFormed::No => "not-well-formed",
        WellFormed::Unchecked => "unchecked",
        WellFormed::Yes => s.verdict.as_ref().map(|v| v.status.as_str()).unwrap_or("error"),
    }
}

fn needs_human(s: &GenerationSample) -> bool {
    status_of(s) == "needs-human"
}

fn own_judgment<'a>(run: &'a Run, sample: &str, rater: &str) -> Option<&'a RatingRecord> {
    run.ratings
        .iter()
        .find(|r| r.sample == sample && r.rater == rater && !r.is_adjudication())
}

fn summary(run: &Run, s: &GenerationSample, rater: Option<&str>) -> SampleSummary {
    let resolution = needs_human(s).then(|| {
        resolutions(&run.ratings)
            .get(&s.id)
            .copied()
            .unwrap_or(Resolution::Open)
    });
    SampleSummary {
        id: s.id.clone(),
        category: s.category.id().to_string(),
        benchmark: s.benchmark.id().to_string(),
        benchmark_name: s.benchmark.name().to_string(),
        index: s.index,
        kind: s.benchmark.kind(),
        wellformed: s.wellformed,
        node_count: s.node_count,
        status: status_of(s).to_string(),
        resolution,
        judged: rater.map(|r| own_judgment(run, &s.id, r).is_some()),
    }
}

fn error(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    (status, Json(json!({"error": message.into(), "code": code}))).into_response()
}

fn unknown(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, "unknown-sample", format!("unknown sample `{id}`"))
}

#[derive(Debug, Default, Deserialize)]
pub struct ListQuery {
    pub status: Option<String>,
    pub resolution: Option<Resolution>,
    pub rater: Option<String>,
    /// Only samples this rater has not judged yet.
    pub unjudged_by: Option<String>,
}

async fn list_samples(State(run): State<Shared>, Query(q): Query<ListQuery>) -> Response {
    let run = run.lock().unwrap_or_else(|p| p.into_inner());
    let items: Vec<SampleSummary> = run
        .samples
        .iter()
        .filter(|s| q.unjudged_by.as_deref().is_none_or(|r| own_judgment(&run, &s.id, r).is_none()))
        .map(|s| summary(&run, s, q.rater.as_deref()))
        .filter(|s| q.status.as_deref().is_none_or(|st| s.status == st))
        .filter(|s| q.resolution.is_none_or(|r| s.resolution == Some(r)))
        .collect();
    Json(items).into_response()
}

#[derive(Debug, Default, Deserialize)]
pub struct RaterQuery {
    pub rater: Option<String>,
}

async fn get_sample(State(run): State<Shared>, UrlPath(id): UrlPath<String>, Query(q): Query<RaterQuery>) -> Response {
    let run = run.lock().unwrap_or_else(|p| p.into_inner());
    let Some(s) = run.sample(&id) else {
        return unknown(&id);
    };
    let rater = q.rater.as_deref();
    let mine = rater.and_then(|r| own_judgment(&run, &id, r)).cloned();
    let ratings = mine
        .is_some()
        .then(|| run.ratings.iter().filter(|r| r.sample == id).cloned().collect());
    let patch = std::fs::read(run.sample_dir(s).join("patch.json"))
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok());
    let detail = SampleDetail {
        summary: summary(&run, s, rater),
        reference: s.benchmark.reference_description().to_string(),
        prompt: prompt_for(s.category, s.benchmark, s.category.is_rich()),
        code: s.extracted_code.clone(),
        patch,
        verdict: s.verdict.clone(),
        my_rating: mine,
        ratings,
    };
    Json(detail).into_response()
}

async fn get_audio(State(run): State<Shared>, UrlPath(id): UrlPath<String>) -> Response {
    let path = {
        let run = run.lock().unwrap_or_else(|p| p.into_inner());
        let Some(s) = run.sample(&id) else {
            return unknown(&id);
        };
        run.sample_dir(s).join("render.wav")
    };
    match std::fs::read(&path) {
        Ok(bytes) => ([(header::CONTENT_TYPE, "audio/wav")], bytes).into_response(),
        Err(_) => error(StatusCode::NOT_FOUND, "not-renderable", "not renderable"),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingBody {
    #[serde(default)]
    sample: Option<String>,
    rater: String,
    judgment: Judgment,
    #[serde(default)]
    adjudicated: Option<Judgment>,
    #[serde(default)]
    timestamp: Option<String>,
}

fn now() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    secs.to_string()
}

/// Validates `record` against the run and appends it to the ratings file
/// and the in-memory list.
pub fn submit_rating(run: &mut Run, record: RatingRecord) -> Result<(), RatingError> {
    record.check()?;
    let Some(s) = run.sample(&record.sample) else {
        return Err(RatingError::UnknownSample(record.sample));
    };
    if !needs_human(s) {
        return Err(RatingError::NotRateable(record.sample));
    }
    if run.ratings.iter().any(|r| record.conflicts_with(r)) {
        return Err(RatingError::Duplicate {
            rater: record.rater,
            sample: record.sample,
        });
    }
    let mut line = serde_json::to_string(&record).expect("rating serializes");
    line.push('\n');
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(run.dir.join(RATINGS_FILE))
        .map_err(|e| RatingError::Malformed(format!("cannot append rating: {e}")))?;
    f.write_all(line.as_bytes())
        .map_err(|e| RatingError::Malformed(format!("cannot append rating: {e}")))?;
    run.ratings.push(record);
    Ok(())
}

async fn post_rating(State(run): State<Shared>, UrlPath(id): UrlPath<String>, body: Bytes) -> Response {
    let parsed: RatingBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, "malformed-rating", e.to_string()),
    };
    if parsed.sample.as_deref().is_some_and(|s| s != id) {
        return error(StatusCode::BAD_REQUEST, "malformed-rating", "sample in body differs from URL");
    }
    let record = RatingRecord {
        sample: id,
        rater: parsed.rater,
        judgment: parsed.judgment,
        adjudicated: parsed.adjudicated,
        timestamp: parsed.timestamp.filter(|t| !t.is_empty()).unwrap_or_else(now),
    };
    let mut run = run.lock().unwrap_or_else(|p| p.into_inner());
    match submit_rating(&mut run, record.clone()) {
        Ok(()) => (StatusCode::CREATED, Json(record)).into_response(),
        Err(e) => {
            let status = match e {
                RatingError::Malformed(_) | RatingError::NotRateable(_) => StatusCode::BAD_REQUEST,
                RatingError::UnknownSample(_) => StatusCode::NOT_FOUND,
                RatingError::Duplicate { .. } => StatusCode::CONFLICT,
            };
            error(status, e.code(), e.to_string())
        }
    }
}

async fn get_report(State(run): State<Shared>) -> Response {
    let run = run.lock().unwrap_or_else(|p| p.into_inner());
    Json(run.report()).into_response()
}

pub fn review_router(run: Run) -> Router {
    Router::new()
        .route("/samples", get(list_samples))
        .route("/samples/{id}", get(get_sample))
        .route("/samples/{id}/audio", get(get_audio))
        .route("/samples/{id}/ratings", axum::routing::post(post_rating))
        .route("/report", get(get_report))
        .with_state(Arc::new(Mutex::new(run)))
}

/// Serves the review API for the run at `run_dir` until the task is
/// dropped.
pub async fn serve_review(run_dir: &Path, addr: SocketAddr) -> Result<(), HarnessError> {
    let run = load_run(run_dir)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, review_router(run)).await?;
    Ok(())
}
