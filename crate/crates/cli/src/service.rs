//! Read-only HTTP service over an obfuscated table.
//!
//! The table is obfuscated once after the socket is bound; until then every
//! data endpoint answers 503. Only the obfuscated view is ever serialized.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde_json::{json, Value};
use tableguard_core::tabular::{obfuscate_table_with, TableData};
use tableguard_core::{Error, Gazetteer, Ledger, Policy};

use crate::report::privacy_metrics;

pub const DEFAULT_LIMIT: usize = 100;
pub const MAX_LIMIT: usize = 1000;

/// Materialized responses for the obfuscated table.
#[derive(Debug)]
pub struct View {
    rows: Vec<String>,
    metrics: String,
    /// Every replacement string the ledger issued, for residual checks.
    pub issued: Vec<String>,
}

impl View {
    pub fn build(table: &TableData, policy: &Policy, g: &Gazetteer, threads: Option<usize>) -> Result<Self, Error> {
        let result = obfuscate_table_with(table, policy, g, Ledger::new(), threads)?;
        let rows = (0..result.table.rows.len())
            .map(|i| serde_json::to_string(&result.table.row_json(i)))
            .collect::<Result<_, _>>()?;
        let metrics = serde_json::to_string(&privacy_metrics(&result.table)?)?;
        let mut issued = Vec::new();
        for e in result.ledger.entries() {
            issued.push(e.text().to_string());
            if let tableguard_core::SurrogateValue::Name(n) = &e.surrogate {
                issued.push(n.given.clone());
            }
        }
        Ok(View { rows, metrics, issued })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// JSON array of rows `offset..offset+limit`, clipped to the table.
    pub fn page(&self, offset: usize, limit: usize) -> String {
        let start = offset.min(self.rows.len());
        let end = start.saturating_add(limit).min(self.rows.len());
        format!("[{}]", self.rows[start..end].join(","))
    }
}

#[derive(Debug)]
enum Phase {
    Loading,
    Ready(Arc<View>),
    Failed(String),
}

/// Shared service state. Starts in the loading phase.
#[derive(Debug)]
pub struct AppState {
    phase: RwLock<Phase>,
    policy: Value,
}

impl AppState {
    pub fn new(policy: &Policy) -> Arc<Self> {
        Arc::new(AppState {
            phase: RwLock::new(Phase::Loading),
            policy: policy.sanitized(),
        })
    }

    pub fn set_ready(&self, view: View) {
        *self.phase.write().expect("state lock") = Phase::Ready(Arc::new(view));
    }

    /// Records a failed load. Only the redacted description is kept.
    pub fn set_failed(&self, err: &Error) {
        *self.phase.write().expect("state lock") = Phase::Failed(err.redacted());
    }

    #[allow(clippy::result_large_err)]
    fn view(&self) -> Result<Arc<View>, Response> {
        match &*self.phase.read().expect("state lock") {
            Phase::Ready(v) => Ok(v.clone()),
            Phase::Loading => Err(error(StatusCode::SERVICE_UNAVAILABLE, "table is loading")),
            Phase::Failed(msg) => Err(error(StatusCode::INTERNAL_SERVER_ERROR, msg)),
        }
    }
}

fn error(status: StatusCode, message: &str) -> Response {
    (status, axum::Json(json!({ "error": message }))).into_response()
}

fn json_body(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/rows", get(rows))
        .route("/v1/metrics", get(metrics))
        .route("/v1/policy", get(policy))
        .with_state(state)
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    match state.view() {
        Ok(_) => axum::Json(json!({ "status": "ok" })).into_response(),
        Err(resp) => resp,
    }
}

#[allow(clippy::result_large_err)]
fn parse_param(params: &HashMap<String, String>, name: &str, default: usize) -> Result<usize, Response> {
    match params.get(name) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| error(StatusCode::BAD_REQUEST, &format!("{name} must be a non-negative integer"))),
    }
}

async fn rows(
    State(state): State<Arc<AppState>>,
    params: Result<Query<HashMap<String, String>>, QueryRejection>,
) -> Response {
    let Ok(Query(params)) = params else {
        return error(StatusCode::BAD_REQUEST, "malformed query string");
    };
    let (offset, limit) = match (
        parse_param(&params, "offset", 0),
        parse_param(&params, "limit", DEFAULT_LIMIT),
    ) {
        (Ok(o), Ok(l)) => (o, l),
        (Err(resp), _) | (_, Err(resp)) => return resp,
    };
    if limit == 0 || limit > MAX_LIMIT {
        return error(StatusCode::BAD_REQUEST, &format!("limit must be between 1 and {MAX_LIMIT}"));
    }
    match state.view() {
        Ok(view) => json_body(view.page(offset, limit)),
        Err(resp) => resp,
    }
}

async fn metrics(State(state): State<Arc<AppState>>) -> Response {
    match state.view() {
        Ok(view) => json_body(view.metrics.clone()),
        Err(resp) => resp,
    }
}

async fn policy(State(state): State<Arc<AppState>>) -> Response {
    axum::Json(state.policy.clone()).into_response()
}

/// Binds `bind`, then obfuscates `table` in the background and serves until
/// interrupted. Bind failures surface before any obfuscation work.
pub async fn serve(
    bind: &str,
    table: TableData,
    policy: Policy,
    gazetteer: Gazetteer,
    threads: Option<usize>,
) -> Result<(), Error> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|e| Error::io(bind, e))?;
    let addr = listener.local_addr().map_err(|e| Error::io(bind, e))?;
    log::info!("listening on {addr}");
    let state = AppState::new(&policy);
    let loader = state.clone();
    tokio::task::spawn_blocking(move || match View::build(&table, &policy, &gazetteer, threads) {
        Ok(view) => {
            log::info!("serving {} obfuscated rows", view.len());
            loader.set_ready(view);
        }
        Err(e) => {
            log::error!("obfuscation failed: {}", e.redacted());
            loader.set_failed(&e);
        }
    });
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(addr.to_string(), e))
}
