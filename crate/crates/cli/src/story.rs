use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use heritage_kg::rdf::{parse_ntriples, Graph, Iri};
use heritage_kg::story::{
    compose_story, load_story_config_file, render_html, render_json, EndpointClient, Endpoint,
    LocalExecutor, QueryExecutor, StoryConfig,
};
use thiserror::Error;

use crate::CliError;

/// Story configs addressed by id (file name stem).
pub type StoryRegistry = BTreeMap<String, StoryConfig>;

/// Loads every `*.json` file of `dir` as a story config.
pub fn load_story_dir(dir: &Path) -> Result<StoryRegistry, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::NotFound(format!("story config directory not found: {} ({e})", dir.display())))?;
    let mut out = StoryRegistry::new();
    let mut paths: Vec<_> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let config = load_story_config_file(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        out.insert(config.id.clone(), config);
    }
    Ok(out)
}

/// Reads the built store.
pub fn load_store(path: &Path) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::NotFound(format!("store file not found: {} ({e}); run `build` first", path.display()))
    })?;
    parse_ntriples(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoryFormat {
    Html,
    Json,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoryRequestError {
    #[error("invalid object IRI {0:?}: {1}")]
    BadObject(String, String),
    #[error("unknown story config {0:?}")]
    UnknownConfig(String),
    #[error("{0}")]
    Upstream(String),
}

impl StoryRequestError {
    pub fn http_status(&self) -> u16 {
        match self {
            StoryRequestError::BadObject(..) => 400,
            StoryRequestError::UnknownConfig(_) => 404,
            StoryRequestError::Upstream(_) => 502,
        }
    }
}

/// Composes and renders one story. Shared by the `story` command and the
/// `/story` route so their outputs are byte-identical.
///
/// Blocks on remote endpoints; call it off the async runtime.
pub fn render_story(
    graph: &Arc<Graph>,
    stories: &StoryRegistry,
    object: &str,
    config_id: &str,
    format: StoryFormat,
    force_strict: bool,
) -> Result<String, StoryRequestError> {
    let iri = Iri::new(object).map_err(|e| StoryRequestError::BadObject(object.to_string(), e.to_string()))?;
    let mut config = stories
        .get(config_id)
        .cloned()
        .ok_or_else(|| StoryRequestError::UnknownConfig(config_id.to_string()))?;
    config.strict |= force_strict;
    let executor: Box<dyn QueryExecutor> = match &config.endpoint {
        Endpoint::Local => Box::new(LocalExecutor::new(Arc::clone(graph))),
        Endpoint::Remote(url) => Box::new(
            EndpointClient::new(url.clone(), Duration::from_secs(config.timeout_secs))
                .map_err(|e| StoryRequestError::Upstream(e.to_string()))?,
        ),
    };
    let doc = compose_story(&config, &iri, executor.as_ref()).map_err(|e| StoryRequestError::Upstream(e.to_string()))?;
    tracing::info!(
        stage = "story",
        object,
        config = config_id,
        sections = doc.sections.len(),
        errored = doc.errored_sections()
    );
    Ok(match format {
        StoryFormat::Html => render_html(&doc),
        StoryFormat::Json => render_json(&doc),
    })
}
