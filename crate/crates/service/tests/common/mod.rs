//! In-process harness: drives the router with `oneshot` and replays scenario
//! scripts through the HTTP API.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use iw_core::scenario::{Bindings, ScenarioScript, SchemaSource, Step};
use iw_core::{Archive, ArchiveOptions};
use iw_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub struct TestApp {
    pub state: AppState,
    router: Router,
}

impl TestApp {
    pub fn new(seed: u64, config: ServiceConfig) -> Self {
        let state = AppState::new(Archive::in_memory(ArchiveOptions::seeded(seed)), config);
        Self {
            router: router(state.clone()),
            state,
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Self::new(
            seed,
            ServiceConfig {
                admin_actors: vec!["ops".into()],
                ..ServiceConfig::default()
            },
        )
    }

    pub async fn send(&self, method: Method, uri: &str, token: Option<&str>, body: Option<String>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req.header("content-type", "application/json").body(Body::from(b)),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        (status, value)
    }

    pub async fn call(&self, method: Method, uri: &str, token: &str, body: Value) -> (StatusCode, Value) {
        let body = (!body.is_null()).then(|| body.to_string());
        self.send(method, uri, Some(token), body).await
    }

    pub async fn get(&self, uri: &str, token: &str) -> (StatusCode, Value) {
        self.send(Method::GET, uri, Some(token), None).await
    }

    pub async fn post(&self, uri: &str, token: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, uri, token, body).await
    }

    pub async fn login(&self, actor: &str) -> String {
        let (status, v) = self
            .send(Method::POST, "/api/sessions", None, Some(json!({ "actor": actor }).to_string()))
            .await;
        assert_eq!(status, StatusCode::CREATED, "{v}");
        v["token"].as_str().unwrap().to_owned()
    }

    pub async fn register_fixture_schema(&self, token: &str) {
        let text = std::fs::read_to_string(fixtures().join("patient-care.schema.json")).unwrap();
        let (status, v) = self.send(Method::POST, "/api/schemas", Some(token), Some(text)).await;
        assert!(status.is_success(), "{status} {v}");
    }

    pub fn export(&self) -> String {
        self.state.view().canonical_export()
    }
}

/// Runs a scenario script through the HTTP API, one request per step, with
/// one session per acting author. Returns the symbol bindings.
pub async fn replay_over_http(app: &TestApp, script: &str) -> Bindings {
    let path = fixtures().join(script);
    let (script, base) = ScenarioScript::load(&path).unwrap();
    let mut tokens: BTreeMap<String, String> = BTreeMap::new();
    let admin = app.login("script-runner").await;

    for src in &script.schemas {
        let text = match src {
            SchemaSource::Path(p) => std::fs::read_to_string(base.join(p)).unwrap(),
            SchemaSource::Inline(s) => serde_json::to_string(s).unwrap(),
        };
        let (status, v) = app.send(Method::POST, "/api/schemas", Some(&admin), Some(text)).await;
        assert!(status.is_success(), "{status} {v}");
    }

    let mut b = Bindings::new();
    let mut instance_actor: BTreeMap<String, String> = BTreeMap::new();
    for (i, step) in script.steps.iter().enumerate() {
        let (status, v) = match step {
            Step::BeginInstance { bind, schema, title, actor } => {
                let token = session_for(app, &mut tokens, actor).await;
                let r = app
                    .post("/api/instances", &token, json!({ "schema": schema, "title": title }))
                    .await;
                b.insert(bind.clone(), r.1["id"].as_str().unwrap_or_default().to_owned());
                instance_actor.insert(bind.clone(), actor.clone());
                r
            }
            Step::BeginActivity { bind, instance, category } => {
                let r = app
                    .post(&format!("/api/instances/{}/activities", b[instance]), &admin, json!({ "category": category }))
                    .await;
                b.insert(bind.clone(), r.1["id"].as_str().unwrap_or_default().to_owned());
                r
            }
            Step::EndActivity { activity } => {
                app.call(Method::PATCH, &format!("/api/activities/{}", b[activity]), &admin, json!({ "status": "ended" }))
                    .await
            }
            Step::CloseInstance { instance } => {
                app.call(Method::PATCH, &format!("/api/instances/{}", b[instance]), &admin, json!({ "status": "closed" }))
                    .await
            }
            Step::RecordElement {
                bind,
                instance,
                activity,
                category,
                body,
                author,
                attachments,
                ds,
                rs,
                force,
            } => {
                let author = author.clone().unwrap_or_else(|| instance_actor[instance].clone());
                let token = session_for(app, &mut tokens, &author).await;
                let ids = |syms: &Vec<String>| syms.iter().map(|s| b[s].clone()).collect::<Vec<_>>();
                let r = app
                    .post(
                        &format!("/api/instances/{}/elements", b[instance]),
                        &token,
                        json!({
                            "activity": b[activity],
                            "category": category,
                            "body": body,
                            "attachments": attachments,
                            "ds_refs": ids(ds),
                            "rs_refs": ids(rs),
                            "override": force,
                        }),
                    )
                    .await;
                b.insert(bind.clone(), r.1["element"]["id"].as_str().unwrap_or_default().to_owned());
                r
            }
            Step::LinkElements { from, to, kind, note } => {
                app.post(
                    &format!("/api/elements/{}/links", b[from]),
                    &admin,
                    json!({ "to": b[to], "kind": kind, "note": note }),
                )
                .await
            }
            Step::Retract { .. } => panic!("the API has no retract endpoint"),
        };
        assert!(status.is_success(), "step {i} ({}): {status} {v}", step.op());
    }
    b
}

async fn session_for(app: &TestApp, tokens: &mut BTreeMap<String, String>, actor: &str) -> String {
    if let Some(t) = tokens.get(actor) {
        return t.clone();
    }
    let t = app.login(actor).await;
    tokens.insert(actor.to_owned(), t.clone());
    t
}

/// The same script run directly on the engine.
pub fn replay_on_engine(script: &str, seed: u64) -> (Archive, Bindings) {
    let mut archive = Archive::in_memory(ArchiveOptions::seeded(seed));
    let (script, base) = ScenarioScript::load(&fixtures().join(script)).unwrap();
    let b = script.replay(&mut archive, &base).unwrap();
    (archive, b)
}
