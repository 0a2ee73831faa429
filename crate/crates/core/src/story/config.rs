use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::Iri;
use crate::sparql::{parse_query, QueryError, Variable};

/// Token replaced by the object's IRI in query and title templates.
pub const OBJECT_PLACEHOLDER: &str = "{OBJECT}";

const CHECK_IRI: &str = "http://example.invalid/object";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    Facts,
    Table,
    BarChart,
    Timeline,
    Text,
    Image,
    RelatedLinks,
    /// Accepted but rendered as a table; geographic rendering is out of scope.
    Map,
}

impl ViewKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViewKind::Facts => "facts",
            ViewKind::Table => "table",
            ViewKind::BarChart => "bar_chart",
            ViewKind::Timeline => "timeline",
            ViewKind::Text => "text",
            ViewKind::Image => "image",
            ViewKind::RelatedLinks => "related_links",
            ViewKind::Map => "map",
        }
    }

    /// Roles a section of this kind must bind.
    pub fn required_roles(self) -> &'static [&'static str] {
        match self {
            ViewKind::BarChart => &["label", "value"],
            ViewKind::Timeline => &["date", "label"],
            ViewKind::Image => &["src"],
            ViewKind::RelatedLinks => &["link"],
            _ => &[],
        }
    }

    /// Roles that shape rows when bound, after the required ones.
    pub fn optional_roles(self) -> &'static [&'static str] {
        match self {
            ViewKind::Image => &["caption"],
            ViewKind::RelatedLinks => &["label"],
            ViewKind::Facts => &["property", "value"],
            _ => &[],
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Local,
    Remote(String),
}

impl Serialize for Endpoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Endpoint::Local => s.serialize_str("local"),
            Endpoint::Remote(url) => s.serialize_str(url),
        }
    }
}

impl<'de> Deserialize<'de> for Endpoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "local" {
            return Ok(Endpoint::Local);
        }
        let http = s.strip_prefix("http://").or_else(|| s.strip_prefix("https://"));
        match http {
            Some(rest) if !rest.is_empty() && Iri::new(s.as_str()).is_ok() => Ok(Endpoint::Remote(s)),
            _ => Err(serde::de::Error::custom(format!(
                "endpoint must be \"local\" or an absolute http(s) URL, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub id: String,
    pub heading: String,
    pub view: ViewKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub object_independent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub static_text: Option<String>,
    /// Role name to result variable, written with or without `?`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub roles: BTreeMap<String, String>,
}

impl SectionSpec {
    /// The variable bound to `role`, without its sigil.
    pub fn role(&self, role: &str) -> Option<&str> {
        self.roles.get(role).map(|v| v.trim_start_matches(['?', '$']))
    }
}

fn default_endpoint() -> Endpoint {
    Endpoint::Local
}

/// A per-typology story recipe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoryConfig {
    /// Set from the file name stem when loaded from disk.
    #[serde(default)]
    pub id: String,
    pub typology: String,
    pub title_template: String,
    #[serde(default = "default_endpoint")]
    pub endpoint: Endpoint,
    #[serde(default)]
    pub strict: bool,
    /// Adds a `generated_at` field to documents; off by default.
    #[serde(default)]
    pub timestamp: bool,
    /// Per-request timeout for remote endpoints.
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Fetches the object label for the title; its first variable is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_query: Option<String>,
    pub sections: Vec<SectionSpec>,
}

fn default_timeout() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{kind}", section.as_ref().map(|s| format!("section {s:?}: ")).unwrap_or_default())]
pub struct StoryConfigError {
    pub section: Option<String>,
    pub kind: StoryConfigErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoryConfigErrorKind {
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("a story needs at least one section")]
    NoSections,
    #[error("duplicate section id")]
    DuplicateId,
    #[error("section id must match [A-Za-z0-9_-]+")]
    BadId,
    #[error("{0} view requires a query")]
    MissingQuery(ViewKind),
    #[error("text view requires static_text")]
    MissingStaticText,
    #[error("{view} view requires role {role:?}")]
    MissingRole { view: ViewKind, role: String },
    #[error("role {role:?} names ?{variable}, which the query does not select")]
    UnknownRoleVariable { role: String, variable: String },
    #[error("query does not contain {{OBJECT}} and is not marked object_independent")]
    MissingPlaceholder,
    #[error("query rejected: {0}")]
    Query(QueryError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn err(section: Option<&str>, kind: StoryConfigErrorKind) -> StoryConfigError {
    StoryConfigError {
        section: section.map(str::to_string),
        kind,
    }
}

/// Parses and validates a story configuration.
///
/// Every query is parse-checked with a placeholder IRI substituted, and
/// role variables must be among the query's result variables.
pub fn load_story_config(text: &str) -> Result<StoryConfig, StoryConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: StoryConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        err(
            None,
            StoryConfigErrorKind::Schema {
                path,
                message: e.into_inner().to_string(),
            },
        )
    })?;
    validate(&config)?;
    Ok(config)
}

/// Loads a configuration file; its id is the file name stem.
pub fn load_story_config_file(path: &Path) -> Result<StoryConfig, StoryConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        err(
            None,
            StoryConfigErrorKind::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            },
        )
    })?;
    let mut config = load_story_config(&text)?;
    config.id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(config)
}

fn validate(config: &StoryConfig) -> Result<(), StoryConfigError> {
    if config.sections.is_empty() {
        return Err(err(None, StoryConfigErrorKind::NoSections));
    }
    if let Some(q) = &config.label_query {
        check_query(q, false).map_err(|k| err(Some("@title"), k))?;
    }
    let mut ids = HashSet::new();
    for s in &config.sections {
        let here = Some(s.id.as_str());
        if s.id.is_empty() || !s.id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-') {
            return Err(err(here, StoryConfigErrorKind::BadId));
        }
        if !ids.insert(s.id.as_str()) {
            return Err(err(here, StoryConfigErrorKind::DuplicateId));
        }
        if s.view == ViewKind::Text && s.static_text.is_none() {
            return Err(err(here, StoryConfigErrorKind::MissingStaticText));
        }
        let Some(query) = &s.query else {
            if s.view != ViewKind::Text {
                return Err(err(here, StoryConfigErrorKind::MissingQuery(s.view)));
            }
            continue;
        };
        let selected = check_query(query, s.object_independent).map_err(|k| err(here, k))?;
        for role in s.view.required_roles() {
            if s.role(role).is_none() {
                return Err(err(
                    here,
                    StoryConfigErrorKind::MissingRole {
                        view: s.view,
                        role: role.to_string(),
                    },
                ));
            }
        }
        for role in s.roles.keys() {
            let var = s.role(role).unwrap_or_default();
            if !selected.iter().any(|v| v.name() == var) {
                return Err(err(
                    here,
                    StoryConfigErrorKind::UnknownRoleVariable {
                        role: role.clone(),
                        variable: var.to_string(),
                    },
                ));
            }
        }
    }
    Ok(())
}

fn check_query(query: &str, object_independent: bool) -> Result<Vec<Variable>, StoryConfigErrorKind> {
    if !object_independent && !query.contains(OBJECT_PLACEHOLDER) {
        return Err(StoryConfigErrorKind::MissingPlaceholder);
    }
    let bound = query.replace(OBJECT_PLACEHOLDER, &format!("<{CHECK_IRI}>"));
    let parsed = parse_query(&bound).map_err(StoryConfigErrorKind::Query)?;
    Ok(parsed.result_variables())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config mismatch: query template does not contain {{OBJECT}}")]
pub struct ConfigMismatch;

/// Replaces every `{OBJECT}` with `<iri>`.
///
/// Object-independent templates are returned unchanged; an object-dependent
/// template without the token is a configuration mismatch.
pub fn bind_object(template: &str, object: &Iri, object_independent: bool) -> Result<String, ConfigMismatch> {
    if object_independent {
        return Ok(template.to_string());
    }
    if !template.contains(OBJECT_PLACEHOLDER) {
        return Err(ConfigMismatch);
    }
    Ok(template.replace(OBJECT_PLACEHOLDER, &object.to_string()))
}
