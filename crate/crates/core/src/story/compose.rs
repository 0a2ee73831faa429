use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{bind_object, SectionSpec, StoryConfig, ViewKind, OBJECT_PLACEHOLDER};
use super::executor::{ExecError, QueryExecutor};
use crate::rdf::{Iri, Term};
use crate::sparql::ResultSet;

/// One value in a section row, shaped like a results-format term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    #[serde(rename = "type")]
    pub kind: String,
    pub value: String,
    #[serde(rename = "xml:lang", default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype: Option<String>,
}

impl Cell {
    pub fn from_term(t: &Term) -> Cell {
        match t {
            Term::Iri(i) => Cell::new("uri", i.as_str()),
            Term::BlankNode(b) => Cell::new("bnode", b.label()),
            Term::Literal(l) => Cell {
                kind: "literal".into(),
                value: l.lexical().to_string(),
                lang: l.language().map(str::to_string),
                datatype: (l.language().is_none() && !l.is_simple()).then(|| l.datatype().as_str().to_string()),
            },
        }
    }

    fn new(kind: &str, value: &str) -> Cell {
        Cell {
            kind: kind.into(),
            value: value.into(),
            lang: None,
            datatype: None,
        }
    }

    pub fn is_iri(&self) -> bool {
        self.kind == "uri"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorySection {
    pub id: String,
    pub heading: String,
    pub view: ViewKind,
    #[serde(default)]
    pub roles: BTreeMap<String, String>,
    pub columns: Vec<String>,
    /// Always present; empty when the query matched nothing or failed.
    pub rows: Vec<Vec<Option<Cell>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub section: String,
    pub query: String,
}

/// A composed story, ready to render.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryDocument {
    pub object: String,
    pub config: String,
    pub title: String,
    pub sections: Vec<StorySection>,
    pub provenance: Vec<ProvenanceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl StoryDocument {
    pub fn errored_sections(&self) -> usize {
        self.sections.iter().filter(|s| s.error.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoryError {
    #[error("section {section:?} failed: {source}")]
    Section { section: String, source: ExecError },
    #[error("section {section:?}: query template does not contain {OBJECT_PLACEHOLDER}")]
    ConfigMismatch { section: String },
}

pub const EMPTY_NOTICE: &str = "No data available.";
pub const MAP_NOTICE: &str = "Map view is not supported yet; showing a table.";

/// View-shaped section content.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SectionPayload {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<Cell>>>,
}

/// Binds, runs and shapes one section's query. Text sections without a
/// query yield an empty payload.
pub fn execute_section(
    spec: &SectionSpec,
    object: &Iri,
    executor: &dyn QueryExecutor,
) -> Result<(Option<String>, SectionPayload), StoryError> {
    let Some(template) = &spec.query else {
        return Ok((None, SectionPayload::default()));
    };
    let query = bind_object(template, object, spec.object_independent).map_err(|_| StoryError::ConfigMismatch {
        section: spec.id.clone(),
    })?;
    let rs = executor.execute(&query).map_err(|source| StoryError::Section {
        section: spec.id.clone(),
        source,
    })?;
    Ok((Some(query), shape(spec, &rs)))
}

fn shape(spec: &SectionSpec, rs: &ResultSet) -> SectionPayload {
    let cell = |s: &crate::sparql::SolutionMapping, var: &str| s.value(var).map(Cell::from_term);
    if spec.view == ViewKind::Facts {
        let pairs: Vec<(Cell, Cell)> = match (spec.role("property"), spec.role("value")) {
            (Some(p), Some(v)) => rs
                .solutions()
                .iter()
                .filter_map(|s| Some((cell(s, p)?, cell(s, v)?)))
                .collect(),
            // Grouped by variable, in projection order.
            _ => rs
                .variables()
                .iter()
                .flat_map(|v| {
                    rs.solutions()
                        .iter()
                        .filter_map(move |s| Some((Cell::new("literal", v.name()), Cell::from_term(s.get(v)?))))
                })
                .collect(),
        };
        let mut seen = HashSet::new();
        let rows = pairs
            .into_iter()
            .filter(|p| seen.insert(p.clone()))
            .map(|(p, v)| vec![Some(p), Some(v)])
            .collect();
        return SectionPayload {
            columns: vec!["property".into(), "value".into()],
            rows,
        };
    }
    let role_columns: Vec<&str> = spec
        .view
        .required_roles()
        .iter()
        .chain(spec.view.optional_roles())
        .copied()
        .filter(|r| spec.role(r).is_some())
        .collect();
    if role_columns.is_empty() {
        let vars = rs.variables();
        SectionPayload {
            columns: vars.iter().map(|v| v.name().to_string()).collect(),
            rows: rs.solutions().iter().map(|s| vars.iter().map(|v| s.get(v).map(Cell::from_term)).collect()).collect(),
        }
    } else {
        SectionPayload {
            columns: role_columns.iter().map(|r| r.to_string()).collect(),
            rows: rs
                .solutions()
                .iter()
                .map(|s| role_columns.iter().map(|r| cell(s, spec.role(r).unwrap_or_default())).collect())
                .collect(),
        }
    }
}

/// Runs every section in order and assembles the document.
///
/// A failing section is kept with its error recorded, unless the config is
/// strict, in which case the first failure aborts composition.
pub fn compose_story(
    config: &StoryConfig,
    object: &Iri,
    executor: &dyn QueryExecutor,
) -> Result<StoryDocument, StoryError> {
    let mut provenance = Vec::new();
    let mut label = None;
    if let Some(q) = &config.label_query {
        let query = q.replace(OBJECT_PLACEHOLDER, &object.to_string());
        provenance.push(ProvenanceEntry {
            section: "@title".into(),
            query: query.clone(),
        });
        if let Ok(rs) = executor.execute(&query) {
            label = rs
                .solutions()
                .first()
                .and_then(|s| rs.variables().first().and_then(|v| s.get(v)))
                .map(|t| t.value().to_string());
        }
    }
    let label = label.unwrap_or_else(|| object.local_name().to_string());
    let mut sections = Vec::with_capacity(config.sections.len());
    for spec in &config.sections {
        let mut section = StorySection {
            id: spec.id.clone(),
            heading: spec.heading.clone(),
            view: spec.view,
            roles: spec.roles.keys().map(|k| (k.clone(), spec.role(k).unwrap_or_default().to_string())).collect(),
            columns: Vec::new(),
            rows: Vec::new(),
            text: spec.static_text.clone(),
            notice: None,
            error: None,
        };
        match execute_section(spec, object, executor) {
            Ok((query, payload)) => {
                if let Some(query) = query {
                    provenance.push(ProvenanceEntry {
                        section: spec.id.clone(),
                        query,
                    });
                }
                section.columns = payload.columns;
                section.rows = payload.rows;
            }
            Err(e) if config.strict => return Err(e),
            Err(e) => {
                if let StoryError::Section { .. } = e {
                    if let Some(t) = &spec.query {
                        provenance.push(ProvenanceEntry {
                            section: spec.id.clone(),
                            query: t.replace(OBJECT_PLACEHOLDER, &object.to_string()),
                        });
                    }
                }
                section.error = Some(match e {
                    StoryError::Section { source, .. } => source.to_string(),
                    other => other.to_string(),
                });
            }
        }
        let mut notices = Vec::new();
        if spec.view == ViewKind::Map {
            notices.push(MAP_NOTICE);
        }
        if section.error.is_none() && section.rows.is_empty() && section.text.is_none() {
            notices.push(EMPTY_NOTICE);
        }
        if !notices.is_empty() {
            section.notice = Some(notices.join(" "));
        }
        sections.push(section);
    }
    Ok(StoryDocument {
        object: object.as_str().to_string(),
        config: config.id.clone(),
        title: config.title_template.replace(OBJECT_PLACEHOLDER, &label),
        sections,
        provenance,
        generated_at: config.timestamp.then(now_rfc3339),
    })
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
