//! Route table and handlers.

use std::collections::BTreeSet;

use axum::extract::{FromRequest, FromRequestParts, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use iw_core::archive::{
    ActivityInstance, ContextSubgraph, ElementDraft, EpisodicEdge, InformationElement,
    ProfileReport, TaskInstance,
};
use iw_core::retrieval::{annotate_hits, contextual_search, expansion_terms, query_terms, search, WorkContext};
use iw_core::schema::{categorical_context, parse_schema, CategoricalContext, LinkKind};
use iw_core::{ArchiveError, Hit, SchemaRef, TaskTypeSchema};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::state::{ApiSession, AppState};

pub type ApiResult<T> = Result<T, ApiError>;
type Created<T> = (StatusCode, Json<T>);

/// JSON body extractor whose rejections use the API error shape.
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct Body<T>(pub T);

/// Query-string extractor with API-shaped rejections.
#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Query), rejection(ApiError))]
pub struct Params<T>(pub T);

/// Path-parameter extractor with API-shaped rejections.
#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Path), rejection(ApiError))]
pub struct Path<T>(pub T);

/// The caller's session, from `Authorization: Bearer <token>`.
pub struct Session(pub ApiSession);

impl FromRequestParts<AppState> for Session {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, ApiError> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthorized)?;
        state.session(token).map(Session).ok_or_else(ApiError::unauthorized)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/schemas", post(register_schema))
        .route("/api/schemas/{id}/{version}", get(get_schema))
        .route("/api/instances", post(begin_instance))
        .route("/api/instances/{id}", get(get_instance).patch(close_instance))
        .route("/api/instances/{id}/activities", post(begin_activity))
        .route("/api/instances/{id}/elements", post(capture))
        .route("/api/instances/{id}/graph", get(instance_graph))
        .route("/api/activities/{id}", patch(end_activity))
        .route("/api/elements/{id}/links", post(link))
        .route("/api/elements/{id}/context", get(element_context))
        .route("/api/search", post(search_handler))
        .route("/api/actors/{id}/profile", get(profile))
        .route("/api/admin/reindex", post(reindex))
        .fallback(|| async { ApiError::not_found("no_route", "no such endpoint") })
        .with_state(state)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRequest {
    pub actor: String,
}

async fn create_session(
    State(state): State<AppState>,
    Body(req): Body<SessionRequest>,
) -> ApiResult<Created<ApiSession>> {
    let actor = req.actor.trim();
    if actor.is_empty() {
        return Err(ApiError::unprocessable("empty_actor", "actor must not be empty"));
    }
    Ok((StatusCode::CREATED, Json(state.create_session(actor))))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SchemaRegistered {
    pub schema: SchemaRef,
    /// False when identical content was already loaded.
    pub created: bool,
}

/// The body is a schema document; it is parsed from raw text so syntax
/// errors can report their position.
async fn register_schema(
    State(state): State<AppState>,
    _session: Session,
    text: String,
) -> ApiResult<Created<SchemaRegistered>> {
    let schema = parse_schema(&text)?;
    let key = schema.schema_ref();
    let created = state.write(|a| a.register_schema(schema))?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(SchemaRegistered { schema: key, created })))
}

async fn get_schema(
    State(state): State<AppState>,
    _session: Session,
    Path((id, version)): Path<(String, u32)>,
) -> ApiResult<Json<TaskTypeSchema>> {
    let key = SchemaRef::new(id, version);
    state
        .view()
        .schema(&key)
        .map(|s| Json((**s).clone()))
        .ok_or_else(|| ApiError::not_found("unknown_schema", format!("unknown schema {key}")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeginInstanceRequest {
    pub schema: SchemaRef,
    pub title: String,
}

async fn begin_instance(
    State(state): State<AppState>,
    Session(session): Session,
    Body(req): Body<BeginInstanceRequest>,
) -> ApiResult<Created<TaskInstance>> {
    let ti = state.write(|a| a.begin_instance(&req.schema, &req.title, &session.actor))?;
    Ok((StatusCode::CREATED, Json(ti)))
}

/// Instance record plus its currently active activity, if any.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceView {
    pub instance: TaskInstance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_activity: Option<ActivityInstance>,
}

async fn get_instance(
    State(state): State<AppState>,
    _session: Session,
    Path(id): Path<String>,
) -> ApiResult<Json<InstanceView>> {
    let view = state.view();
    let instance = view
        .instance(&id)
        .cloned()
        .ok_or(ArchiveError::UnknownInstance(id.clone()))?;
    Ok(Json(InstanceView {
        active_activity: view.active_activity(&id).cloned(),
        instance,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatusRequest {
    pub status: String,
}

fn expect_status(req: &StatusRequest, wanted: &str) -> ApiResult<()> {
    if req.status == wanted {
        Ok(())
    } else {
        Err(ApiError::unprocessable(
            "unsupported_transition",
            format!("only status '{wanted}' can be set here, got '{}'", req.status),
        ))
    }
}

async fn close_instance(
    State(state): State<AppState>,
    _session: Session,
    Path(id): Path<String>,
    Body(req): Body<StatusRequest>,
) -> ApiResult<Json<TaskInstance>> {
    expect_status(&req, "closed")?;
    Ok(Json(state.write(|a| a.close_instance(&id))?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeginActivityRequest {
    pub category: String,
}

async fn begin_activity(
    State(state): State<AppState>,
    _session: Session,
    Path(instance): Path<String>,
    Body(req): Body<BeginActivityRequest>,
) -> ApiResult<Created<ActivityInstance>> {
    let a = state.write(|a| a.begin_activity(&instance, &req.category))?;
    Ok((StatusCode::CREATED, Json(a)))
}

async fn end_activity(
    State(state): State<AppState>,
    _session: Session,
    Path(id): Path<String>,
    Body(req): Body<StatusRequest>,
) -> ApiResult<Json<ActivityInstance>> {
    expect_status(&req, "ended")?;
    Ok(Json(state.write(|a| a.end_activity(&id))?))
}

/// Capture parameters; the instance comes from the path and the author from
/// the session.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    pub activity: String,
    pub category: String,
    pub body: String,
    #[serde(default)]
    pub attachments: Vec<String>,
    #[serde(default)]
    pub ds_refs: Vec<String>,
    #[serde(default)]
    pub rs_refs: Vec<String>,
    #[serde(default, rename = "override")]
    pub force: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CaptureResponse {
    pub element: InformationElement,
    pub edges: Vec<EpisodicEdge>,
}

async fn capture(
    State(state): State<AppState>,
    Session(session): Session,
    Path(instance): Path<String>,
    Body(req): Body<CaptureRequest>,
) -> ApiResult<Created<CaptureResponse>> {
    if let Some(named) = &req.instance {
        if *named != instance {
            return Err(ApiError::unprocessable(
                "instance_mismatch",
                format!("body names instance '{named}' but the path names '{instance}'"),
            ));
        }
    }
    let draft = ElementDraft {
        instance,
        activity: req.activity,
        category: req.category,
        author: session.actor,
        body: req.body,
        attachments: req.attachments,
        ds_targets: req.ds_refs,
        rs_targets: req.rs_refs,
        force: req.force,
    };
    let recorded = state.write(|a| a.record_element(draft))?;
    Ok((
        StatusCode::CREATED,
        Json(CaptureResponse {
            element: recorded.element,
            edges: recorded.edges,
        }),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRequest {
    pub to: String,
    pub kind: LinkKind,
    #[serde(default)]
    pub note: Option<String>,
}

async fn link(
    State(state): State<AppState>,
    _session: Session,
    Path(from): Path<String>,
    Body(req): Body<LinkRequest>,
) -> ApiResult<Created<EpisodicEdge>> {
    let edge = state.write(|a| a.link_elements(&from, &req.to, req.kind, req.note))?;
    Ok((StatusCode::CREATED, Json(edge)))
}

#[derive(Debug, Deserialize)]
pub struct DepthQuery {
    pub depth: Option<u32>,
}

/// Both context types of one element.
#[derive(Debug, Serialize, Deserialize)]
pub struct ContextPayload {
    pub episodic: ContextSubgraph,
    /// Radius-1 neighborhood of the element's activity category; absent if
    /// the pinned schema or activity cannot be resolved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categorical: Option<CategoricalContext>,
}

async fn element_context(
    State(state): State<AppState>,
    _session: Session,
    Path(id): Path<String>,
    Params(q): Params<DepthQuery>,
) -> ApiResult<Json<ContextPayload>> {
    let depth = q.depth.unwrap_or(1);
    if depth == 0 {
        return Err(ApiError::unprocessable("invalid_depth", "depth must be at least 1"));
    }
    let view = state.view();
    let episodic = view.episodic_context(&id, depth)?;
    let categorical = view.element(&id).and_then(|ie| {
        let schema = view.element_schema(ie)?;
        let category = view.element_activity_category(ie)?;
        categorical_context(schema, category, 1).ok()
    });
    Ok(Json(ContextPayload { episodic, categorical }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRequest {
    pub query: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ctx: Option<WorkContext>,
    #[serde(default)]
    pub semantic: bool,
}

fn default_k() -> usize {
    10
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SearchResponse {
    pub built_at_seq: u64,
    pub hits: Vec<Hit>,
}

async fn search_handler(
    State(state): State<AppState>,
    _session: Session,
    Body(req): Body<SearchRequest>,
) -> ApiResult<Json<SearchResponse>> {
    if req.k == 0 {
        return Err(ApiError::unprocessable("invalid_k", "k must be at least 1"));
    }
    let index = state.search_index();
    let view = state.view();
    let params = state.config().scoring.params();
    let mut terms = query_terms(&index, &req.query);
    let hits = match &req.ctx {
        Some(ctx) => {
            let schema = ctx.resolve(&view)?;
            let hits = contextual_search(&index, schema, &req.query, ctx, req.k, req.semantic, &params)?;
            if req.semantic {
                let extra: BTreeSet<String> = expansion_terms(schema, ctx, &index.tokenizer, &terms);
                terms.extend(extra);
            }
            hits
        }
        None if req.semantic => {
            return Err(ApiError::unprocessable(
                "semantic_requires_context",
                "semantic expansion needs a work context",
            ))
        }
        None => search(&index, &req.query, req.k, &params),
    };
    let hits = annotate_hits(&view, hits, &terms, &index.tokenizer)?;
    Ok(Json(SearchResponse {
        built_at_seq: index.built_at_seq,
        hits,
    }))
}

async fn instance_graph(
    State(state): State<AppState>,
    _session: Session,
    Path(id): Path<String>,
) -> ApiResult<Json<ContextSubgraph>> {
    Ok(Json(state.view().instance_graph(&id)?))
}

async fn profile(
    State(state): State<AppState>,
    _session: Session,
    Path(actor): Path<String>,
) -> ApiResult<Json<ProfileReport>> {
    Ok(Json(state.view().expertise_profile(&actor)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IndexStatus {
    pub built_at_seq: u64,
    pub documents: usize,
}

async fn reindex(State(state): State<AppState>, Session(session): Session) -> ApiResult<Json<IndexStatus>> {
    if !state.is_admin(&session.actor) {
        return Err(ApiError::forbidden(format!("'{}' is not an admin actor", session.actor)));
    }
    let index = state.reindex();
    Ok(Json(IndexStatus {
        built_at_seq: index.built_at_seq,
        documents: index.n,
    }))
}
