use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use heritage_kg::rdf::Graph;
use heritage_kg::sparql::{evaluate, parse_query, serialize_results_json};
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

use crate::story::{render_story, StoryFormat, StoryRegistry};

pub const RESULTS_JSON: &str = "application/sparql-results+json";

#[derive(Clone)]
pub struct AppState {
    pub graph: Arc<Graph>,
    pub stories: Arc<StoryRegistry>,
    pub strict: bool,
}

pub fn router(state: AppState, assets: &std::path::Path) -> Router {
    Router::new()
        .route("/sparql", get(sparql_get).post(sparql_post))
        .route("/story", get(story))
        .nest_service("/assets", ServeDir::new(assets))
        .layer(TraceLayer::new_for_http())
        .with_state(state)
}

fn plain(status: StatusCode, message: impl Into<String>) -> Response {
    (status, [(header::CONTENT_TYPE, "text/plain; charset=utf-8")], message.into()).into_response()
}

fn run_query(graph: &Graph, query: Option<&str>) -> Response {
    let Some(query) = query else {
        return plain(StatusCode::BAD_REQUEST, "missing `query` parameter");
    };
    match parse_query(query) {
        Ok(q) => {
            let rs = evaluate(&q, graph);
            ([(header::CONTENT_TYPE, RESULTS_JSON)], serialize_results_json(&rs)).into_response()
        }
        Err(e) => plain(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    }
}

async fn sparql_get(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> Response {
    run_query(&state.graph, params.get("query").map(String::as_str))
}

async fn sparql_post(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Response {
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .split(';')
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase();
    match content_type.as_str() {
        "application/sparql-query" => match std::str::from_utf8(&body) {
            Ok(q) => run_query(&state.graph, Some(q)),
            Err(_) => plain(StatusCode::BAD_REQUEST, "query is not UTF-8"),
        },
        "application/x-www-form-urlencoded" => {
            let Ok(form) = serde_urlencoded::from_bytes::<HashMap<String, String>>(&body) else {
                return plain(StatusCode::BAD_REQUEST, "malformed form body");
            };
            run_query(&state.graph, form.get("query").map(String::as_str))
        }
        _ => plain(StatusCode::UNSUPPORTED_MEDIA_TYPE, "expected a form or application/sparql-query body"),
    }
}

fn wants_json(headers: &HeaderMap) -> bool {
    headers
        .get_all(header::ACCEPT)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .any(|v| v.split(',').any(|m| m.split(';').next().unwrap_or("").trim() == "application/json"))
}

async fn story(State(state): State<AppState>, headers: HeaderMap, Query(params): Query<HashMap<String, String>>) -> Response {
    let (Some(object), Some(config)) = (params.get("object").cloned(), params.get("config").cloned()) else {
        return plain(StatusCode::BAD_REQUEST, "`object` and `config` parameters are required");
    };
    let format = if wants_json(&headers) {
        StoryFormat::Json
    } else {
        StoryFormat::Html
    };
    let result = tokio::task::spawn_blocking(move || {
        render_story(&state.graph, &state.stories, &object, &config, format, state.strict)
    })
    .await;
    match result {
        Ok(Ok(body)) => {
            let content_type = match format {
                StoryFormat::Html => "text/html; charset=utf-8",
                StoryFormat::Json => "application/json",
            };
            let mut response = body.into_response();
            response
                .headers_mut()
                .insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
            response
        }
        Ok(Err(e)) => {
            let status = StatusCode::from_u16(e.http_status()).expect("valid status");
            tracing::warn!(status = status.as_u16(), error = %e, "story request failed");
            plain(status, e.to_string())
        }
        Err(e) => plain(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Serves until ctrl-c or SIGTERM.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown_signal()).await
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
    tracing::info!("shutting down");
}
