use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::rdf::Graph;
use crate::sparql::{execute_query, parse_results_json, QueryError, ResultSet};

/// Queries above this length are sent as a form POST instead of a GET.
pub const MAX_GET_QUERY_LEN: usize = 2000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("{0}")]
    Query(#[from] QueryError),
    #[error("upstream endpoint {endpoint}{}: {message}", status.map(|s| format!(" returned {s}")).unwrap_or_default())]
    Upstream {
        endpoint: String,
        status: Option<u16>,
        message: String,
    },
}

/// Runs SELECT queries for story sections.
pub trait QueryExecutor: Send + Sync {
    fn execute(&self, query: &str) -> Result<ResultSet, ExecError>;
}

/// Evaluates against an in-memory graph.
#[derive(Debug, Clone)]
pub struct LocalExecutor {
    graph: Arc<Graph>,
}

impl LocalExecutor {
    pub fn new(graph: Arc<Graph>) -> Self {
        LocalExecutor { graph }
    }
}

impl QueryExecutor for LocalExecutor {
    fn execute(&self, query: &str) -> Result<ResultSet, ExecError> {
        Ok(execute_query(&self.graph, query)?)
    }
}

/// A SPARQL protocol client.
///
/// Uses a blocking HTTP client, so it must not be created or used on an
/// async runtime thread.
#[derive(Debug, Clone)]
pub struct EndpointClient {
    url: String,
    client: reqwest::blocking::Client,
}

impl EndpointClient {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Result<Self, ExecError> {
        let url = url.into();
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ExecError::Upstream {
                endpoint: url.clone(),
                status: None,
                message: e.to_string(),
            })?;
        Ok(EndpointClient { url, client })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn upstream(&self, status: Option<u16>, message: impl Into<String>) -> ExecError {
        ExecError::Upstream {
            endpoint: self.url.clone(),
            status,
            message: message.into(),
        }
    }
}

impl QueryExecutor for EndpointClient {
    fn execute(&self, query: &str) -> Result<ResultSet, ExecError> {
        let request = if query.len() > MAX_GET_QUERY_LEN {
            self.client.post(&self.url).form(&[("query", query)])
        } else {
            self.client.get(&self.url).query(&[("query", query)])
        };
        let response = request
            .header(reqwest::header::ACCEPT, "application/sparql-results+json")
            .send()
            .map_err(|e| self.upstream(None, e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(self.upstream(Some(status.as_u16()), status.canonical_reason().unwrap_or("error")));
        }
        let body = response.text().map_err(|e| self.upstream(Some(status.as_u16()), e.to_string()))?;
        parse_results_json(&body).map_err(|e| self.upstream(Some(status.as_u16()), e.to_string()))
    }
}
