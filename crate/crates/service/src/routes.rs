use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::get;
use axum::{Json, Router};
use latent_concepts::agreement::{
    against_reference, AgreementStats, AgreementTable, Answer, AnnotationRecord, MeanAgreement, PairAgreement,
    Question,
};
use latent_concepts::taxonomy::ConceptLabel;
use serde::{Deserialize, Serialize};

use crate::data::{ClusterIndexEntry, ClusterView};
use crate::store::StoreError;
use crate::{AppState, ServiceError};

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ServiceError>;

const DEFAULT_PAGE_SIZE: i64 = 50;
const MAX_PAGE_SIZE: i64 = 1000;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/clusters", get(list_clusters))
        .route("/clusters/{id}", get(get_cluster))
        .route("/clusters/{id}/sibling", get(get_sibling))
        .route("/annotations", axum::routing::post(post_annotation).get(list_annotations))
        .route("/labels", get(get_labels))
        .route("/agreement", get(get_agreement))
        .with_state(state)
}

#[derive(Deserialize)]
struct PageParams {
    page: Option<String>,
    page_size: Option<String>,
}

#[derive(Serialize)]
struct ClusterPage {
    page: usize,
    page_size: usize,
    total: usize,
    clusters: Vec<ClusterIndexEntry>,
}

fn parse_param(name: &str, value: Option<&str>, default: i64, range: std::ops::RangeInclusive<i64>) -> ApiResult<i64> {
    let v = match value {
        None => default,
        Some(s) => s
            .parse::<i64>()
            .map_err(|_| ServiceError::BadRequest(format!("{name} must be an integer, got {s:?}")))?,
    };
    if !range.contains(&v) {
        return Err(ServiceError::BadRequest(format!(
            "{name} must be in {}..={}, got {v}",
            range.start(),
            range.end()
        )));
    }
    Ok(v)
}

/// Zero-based pages.
async fn list_clusters(State(s): State<Shared>, Query(p): Query<PageParams>) -> ApiResult<Json<ClusterPage>> {
    let page = parse_param("page", p.page.as_deref(), 0, 0..=i64::MAX)? as usize;
    let page_size = parse_param("page_size", p.page_size.as_deref(), DEFAULT_PAGE_SIZE, 1..=MAX_PAGE_SIZE)? as usize;
    let total = s.data.n_clusters();
    let store = s.store.read().expect("store lock");
    let start = page.saturating_mul(page_size).min(total);
    let end = start.saturating_add(page_size).min(total);
    let clusters = (start..end)
        .filter_map(|c| s.data.index_entry(c, store.annotators_of(c, Question::Q1)))
        .collect();
    Ok(Json(ClusterPage {
        page,
        page_size,
        total,
        clusters,
    }))
}

async fn get_cluster(State(s): State<Shared>, Path(id): Path<usize>) -> ApiResult<Json<ClusterView>> {
    s.data
        .view(id)
        .map(Json)
        .ok_or_else(|| ServiceError::NotFound(format!("unknown cluster {id}")))
}

async fn get_sibling(State(s): State<Shared>, Path(id): Path<usize>) -> ApiResult<Json<ClusterView>> {
    if s.data.summary(id).is_none() {
        return Err(ServiceError::NotFound(format!("unknown cluster {id}")));
    }
    let sibling = s
        .data
        .sibling(id)
        .ok_or_else(|| ServiceError::NotFound(format!("cluster {id} has no sibling")))?;
    Ok(Json(s.data.view(sibling).expect("siblings are clusters")))
}

/// Wire form of a record; labels stay strings until validated.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationRequest {
    cluster_id: usize,
    annotator_id: String,
    question: Question,
    answer: Answer,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    timestamp: Option<String>,
    #[serde(default)]
    supersedes: Option<usize>,
}

impl AnnotationRequest {
    fn into_record(self) -> Result<AnnotationRecord, StoreError> {
        let labels = self
            .labels
            .iter()
            .map(|text| {
                ConceptLabel::parse(text).map_err(|e| StoreError::InvalidLabel {
                    text: text.clone(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(AnnotationRecord {
            cluster_id: self.cluster_id,
            annotator_id: self.annotator_id,
            question: self.question,
            answer: self.answer,
            labels,
            timestamp: self.timestamp,
            supersedes: self.supersedes,
        })
    }
}

#[derive(Serialize)]
struct Created {
    id: usize,
}

async fn post_annotation(
    State(s): State<Shared>,
    body: Result<Json<serde_json::Value>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Created>)> {
    let Json(value) = body.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let request: AnnotationRequest = serde_json::from_value(value)
        .map_err(|e| StoreError::InvalidRecord(format!("malformed annotation: {e}")))?;
    let record = request.into_record()?;
    s.data.accepts(record.cluster_id, record.question)?;

    // The appender lock serialises writers; readers only wait for `apply`.
    let mut appender = s.appender.lock().expect("appender lock");
    s.store.read().expect("store lock").check(&record)?;
    appender.append(&record)?;
    let id = s.store.write().expect("store lock").apply(record)?;
    Ok((StatusCode::CREATED, Json(Created { id })))
}

async fn list_annotations(State(s): State<Shared>) -> Json<Vec<AnnotationRecord>> {
    Json(s.store.read().expect("store lock").log().to_vec())
}

async fn get_labels(State(s): State<Shared>) -> Json<Vec<String>> {
    Json(s.store.read().expect("store lock").labels().sorted_strings())
}

#[derive(Deserialize)]
struct AgreementParams {
    question: Option<String>,
    /// Pair every annotator with this reference (e.g. `consolidation`).
    reference: Option<String>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum AgreementResponse {
    Pooled(AgreementStats),
    Paired {
        pairs: Vec<PairAgreement>,
        average: MeanAgreement,
    },
}

async fn get_agreement(State(s): State<Shared>, Query(p): Query<AgreementParams>) -> ApiResult<Json<AgreementResponse>> {
    let question: Question = p
        .question
        .as_deref()
        .unwrap_or("Q1")
        .parse()
        .map_err(|e: latent_concepts::Error| ServiceError::BadRequest(e.to_string()))?;
    let store = s.store.read().expect("store lock");
    let insufficient = |e: latent_concepts::Error| ServiceError::Conflict(format!("insufficient data: {e}"));
    match p.reference {
        None => {
            let table = AgreementTable::from_records(store.log(), question, None).map_err(insufficient)?;
            Ok(Json(AgreementResponse::Pooled(AgreementStats::compute(&table))))
        }
        Some(reference) => {
            let pairs = against_reference(store.log(), question, &reference).map_err(insufficient)?;
            let average = MeanAgreement::of(&pairs).expect("at least one pair");
            Ok(Json(AgreementResponse::Paired { pairs, average }))
        }
    }
}
