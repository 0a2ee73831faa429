//! The JSON mapping dialect and its load-time validation.
//!
//! Every key of the dialect corresponds to one RML construct:
//!
//! | JSON key | RML |
//! |---|---|
//! | `sources[]` | `rml:logicalSource` (CSV, one iteration per row) |
//! | `triplesMaps[]` | `rr:TriplesMap` |
//! | `subject` | `rr:subjectMap` |
//! | `subject.classes` | `rr:class` |
//! | `predicateObjects[]` | `rr:predicateObjectMap` |
//! | `constant` / `reference` / `template` | `rr:constant` / `rml:reference` / `rr:template` |
//! | `function` | `fnml:functionValue` |
//! | `termType` | `rr:termType` |
//! | `join` | `rr:parentTriplesMap` + `rr:joinCondition` |

use serde::Deserialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

use super::template::{Template, TemplateError};
use crate::rdf::vocab::rdf;
use crate::rdf::{BlankNode, Iri, Literal, PrefixMap, Term};
use crate::tabular::{TableKind, TableProfile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalSource {
    pub id: String,
    pub table: TableKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermType {
    Iri,
    Literal,
    Blank,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermMapKind {
    Constant(Term),
    Reference(String),
    Template(Template),
    Function { name: String, args: Vec<TermMap> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermMap {
    pub kind: TermMapKind,
    pub term_type: TermType,
    pub datatype: Option<Iri>,
    pub language: Option<String>,
}

impl TermMap {
    /// Columns this term map reads, including those of function arguments.
    pub fn columns(&self) -> Vec<&str> {
        match &self.kind {
            TermMapKind::Constant(_) => vec![],
            TermMapKind::Reference(c) => vec![c.as_str()],
            TermMapKind::Template(t) => t.columns().collect(),
            TermMapKind::Function { args, .. } => args.iter().flat_map(TermMap::columns).collect(),
        }
    }

    pub(crate) fn functions<'a>(&'a self, path: &str, out: &mut Vec<(&'a str, String)>) {
        if let TermMapKind::Function { name, args } = &self.kind {
            out.push((name.as_str(), format!("{path}.function")));
            for (i, a) in args.iter().enumerate() {
                a.functions(&format!("{path}.function.args[{i}]"), out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectMap {
    pub term: TermMap,
    pub classes: Vec<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinCondition {
    pub parent: String,
    /// Index of the parent in [`MappingDocument::triples_maps`].
    pub parent_index: usize,
    pub child_column: String,
    pub parent_column: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectMap {
    Term(TermMap),
    /// The object is the parent triples map's subject for every parent row
    /// whose `parent_column` value equals this row's `child_column` value.
    Join(JoinCondition),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateObjectMap {
    pub predicate: Iri,
    pub object: ObjectMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplesMap {
    pub id: String,
    pub source: String,
    pub table: TableKind,
    pub subject: SubjectMap,
    pub predicate_objects: Vec<PredicateObjectMap>,
}

/// A loaded mapping with every cross-reference resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingDocument {
    pub prefixes: PrefixMap,
    pub sources: Vec<LogicalSource>,
    pub triples_maps: Vec<TriplesMap>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingErrorKind {
    #[error("{0}")]
    Json(String),
    #[error("dangling reference to {what} {id:?}")]
    DanglingReference { what: &'static str, id: String },
    #[error("duplicate {what} id {id:?}")]
    DuplicateId { what: &'static str, id: String },
    #[error("column {column:?} is not in the {table} profile")]
    UnknownColumn { column: String, table: TableKind },
    #[error("no table profile for {0} sources")]
    MissingProfile(TableKind),
    #[error("cyclic join: {}", .0.join(" -> "))]
    CyclicJoin(Vec<String>),
    #[error("bad template: {0}")]
    Template(#[from] TemplateError),
    #[error("{0}")]
    Invalid(String),
}

/// A load error located by its JSON path, e.g.
/// `triplesMaps[1].predicateObjects[0].join`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {kind}")]
pub struct MappingError {
    pub path: String,
    pub kind: MappingErrorKind,
}

fn err(path: impl Into<String>, kind: MappingErrorKind) -> MappingError {
    MappingError {
        path: path.into(),
        kind,
    }
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> MappingError {
    err(path, MappingErrorKind::Invalid(message.into()))
}

// Raw serde shapes. Unknown keys are rejected everywhere.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    prefixes: BTreeMap<String, String>,
    sources: Vec<RawSource>,
    #[serde(rename = "triplesMaps")]
    triples_maps: Vec<RawTriplesMap>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    id: String,
    table: TableKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTriplesMap {
    id: String,
    source: String,
    subject: RawSubject,
    #[serde(default, rename = "predicateObjects")]
    predicate_objects: Vec<RawPredicateObject>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubject {
    constant: Option<String>,
    reference: Option<String>,
    template: Option<String>,
    function: Option<RawFunction>,
    #[serde(rename = "termType")]
    term_type: Option<TermType>,
    #[serde(default)]
    classes: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTermMap {
    constant: Option<String>,
    reference: Option<String>,
    template: Option<String>,
    function: Option<RawFunction>,
    #[serde(rename = "termType")]
    term_type: Option<TermType>,
    datatype: Option<String>,
    language: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    name: String,
    #[serde(default)]
    args: Vec<RawTermMap>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPredicateObject {
    predicate: String,
    object: Option<RawTermMap>,
    join: Option<RawJoin>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoin {
    #[serde(rename = "parentTriplesMap")]
    parent_triples_map: String,
    child: String,
    parent: String,
}

/// Parses and validates a mapping document against the table profiles.
pub fn load_mapping(text: &str, profiles: &[TableProfile]) -> Result<MappingDocument, MappingError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        err(path, MappingErrorKind::Json(e.into_inner().to_string()))
    })?;
    Loader::new(profiles).load(raw)
}

impl MappingDocument {
    pub fn from_json(text: &str, profiles: &[TableProfile]) -> Result<Self, MappingError> {
        load_mapping(text, profiles)
    }
}

struct Loader<'a> {
    profiles: HashMap<TableKind, &'a TableProfile>,
    prefixes: PrefixMap,
}

impl<'a> Loader<'a> {
    fn new(profiles: &'a [TableProfile]) -> Self {
        Loader {
            profiles: profiles.iter().map(|p| (p.kind(), p)).collect(),
            prefixes: PrefixMap::new(),
        }
    }

    fn load(mut self, raw: RawDocument) -> Result<MappingDocument, MappingError> {
        for (name, ns) in &raw.prefixes {
            let path = format!("prefixes.{name}");
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(invalid(path, format!("bad prefix name {name:?}")));
            }
            let iri = Iri::new(ns.as_str()).map_err(|e| invalid(&path, e.to_string()))?;
            self.prefixes.insert(name.clone(), iri);
        }

        let mut sources = Vec::new();
        let mut source_ids = HashMap::new();
        for (i, s) in raw.sources.into_iter().enumerate() {
            let path = format!("sources[{i}]");
            if source_ids.insert(s.id.clone(), s.table).is_some() {
                return Err(err(
                    format!("{path}.id"),
                    MappingErrorKind::DuplicateId {
                        what: "source",
                        id: s.id,
                    },
                ));
            }
            if !self.profiles.contains_key(&s.table) {
                return Err(err(format!("{path}.table"), MappingErrorKind::MissingProfile(s.table)));
            }
            sources.push(LogicalSource {
                id: s.id,
                table: s.table,
            });
        }

        let mut map_index = HashMap::new();
        for (i, tm) in raw.triples_maps.iter().enumerate() {
            if map_index.insert(tm.id.clone(), i).is_some() {
                return Err(err(
                    format!("triplesMaps[{i}].id"),
                    MappingErrorKind::DuplicateId {
                        what: "triples map",
                        id: tm.id.clone(),
                    },
                ));
            }
        }
        let tables: Vec<Option<TableKind>> = raw
            .triples_maps
            .iter()
            .map(|tm| source_ids.get(&tm.source).copied())
            .collect();

        let mut triples_maps = Vec::new();
        for (i, tm) in raw.triples_maps.into_iter().enumerate() {
            let path = format!("triplesMaps[{i}]");
            let table = tables[i].ok_or_else(|| {
                err(
                    format!("{path}.source"),
                    MappingErrorKind::DanglingReference {
                        what: "source",
                        id: tm.source.clone(),
                    },
                )
            })?;
            let profile = self.profiles[&table];

            let subject = self.subject(tm.subject, profile, &format!("{path}.subject"))?;
            let mut predicate_objects = Vec::new();
            for (j, pom) in tm.predicate_objects.into_iter().enumerate() {
                let pom_path = format!("{path}.predicateObjects[{j}]");
                let predicate = self.iri(&pom.predicate, &format!("{pom_path}.predicate"))?;
                let object = match (pom.object, pom.join) {
                    (Some(_), Some(_)) => {
                        return Err(invalid(pom_path, "set either object or join, not both"));
                    }
                    (None, None) => return Err(invalid(pom_path, "missing object or join")),
                    (Some(o), None) => {
                        let o_path = format!("{pom_path}.object");
                        let tm = self.term_map(o, profile, &o_path, TermType::Literal)?;
                        if tm.term_type == TermType::Blank {
                            return Err(invalid(o_path, "blank nodes are only generated in subject position"));
                        }
                        ObjectMap::Term(tm)
                    }
                    (None, Some(j)) => {
                        let j_path = format!("{pom_path}.join");
                        let Some(&parent_index) = map_index.get(&j.parent_triples_map) else {
                            return Err(err(
                                j_path,
                                MappingErrorKind::DanglingReference {
                                    what: "triples map",
                                    id: j.parent_triples_map,
                                },
                            ));
                        };
                        check_column(&j.child, profile, &format!("{j_path}.child"))?;
                        if let Some(parent_table) = tables[parent_index] {
                            check_column(&j.parent, self.profiles[&parent_table], &format!("{j_path}.parent"))?;
                        }
                        ObjectMap::Join(JoinCondition {
                            parent: j.parent_triples_map,
                            parent_index,
                            child_column: j.child,
                            parent_column: j.parent,
                        })
                    }
                };
                predicate_objects.push(PredicateObjectMap { predicate, object });
            }
            triples_maps.push(TriplesMap {
                id: tm.id,
                source: tm.source,
                table,
                subject,
                predicate_objects,
            });
        }

        check_join_cycles(&triples_maps)?;
        Ok(MappingDocument {
            prefixes: self.prefixes,
            sources,
            triples_maps,
        })
    }

    /// Expands a declared `prefix:local` name; anything else must be an
    /// absolute IRI already.
    fn expand(&self, s: &str) -> String {
        if let Some((prefix, local)) = s.split_once(':') {
            if let Some(ns) = self.prefixes.get(prefix) {
                return format!("{}{local}", ns.as_str());
            }
        }
        s.to_string()
    }

    fn iri(&self, s: &str, path: &str) -> Result<Iri, MappingError> {
        if s == "a" {
            return Ok(Iri::new(rdf::TYPE).expect("valid"));
        }
        Iri::new(self.expand(s)).map_err(|e| invalid(path, e.to_string()))
    }

    fn subject(&self, raw: RawSubject, profile: &TableProfile, path: &str) -> Result<SubjectMap, MappingError> {
        let classes = raw
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| self.iri(c, &format!("{path}.classes[{i}]")))
            .collect::<Result<_, _>>()?;
        let as_term = RawTermMap {
            constant: raw.constant,
            reference: raw.reference,
            template: raw.template,
            function: raw.function,
            term_type: raw.term_type,
            datatype: None,
            language: None,
        };
        let term = self.term_map(as_term, profile, path, TermType::Iri)?;
        if term.term_type == TermType::Literal {
            return Err(invalid(path, "subject term type cannot be literal"));
        }
        Ok(SubjectMap { term, classes })
    }

    /// `reference_default` is the term type of reference and function maps
    /// that do not set `termType`; constants and templates default to IRIs.
    fn term_map(
        &self,
        raw: RawTermMap,
        profile: &TableProfile,
        path: &str,
        reference_default: TermType,
    ) -> Result<TermMap, MappingError> {
        let set = [
            raw.constant.is_some(),
            raw.reference.is_some(),
            raw.template.is_some(),
            raw.function.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if set != 1 {
            return Err(invalid(
                path,
                "exactly one of constant, reference, template, function must be set",
            ));
        }
        let literal_default = raw.datatype.is_some() || raw.language.is_some();
        let term_type = raw.term_type.unwrap_or(if literal_default {
            TermType::Literal
        } else if raw.reference.is_some() || raw.function.is_some() {
            reference_default
        } else {
            TermType::Iri
        });
        if term_type != TermType::Literal && literal_default {
            return Err(invalid(path, "datatype and language apply only to literal term maps"));
        }
        if raw.datatype.is_some() && raw.language.is_some() {
            return Err(invalid(path, "datatype and language are mutually exclusive"));
        }
        let datatype = raw
            .datatype
            .as_deref()
            .map(|d| self.iri(d, &format!("{path}.datatype")))
            .transpose()?;
        if datatype.as_ref().is_some_and(|d| d.as_str() == rdf::LANG_STRING) {
            return Err(invalid(format!("{path}.datatype"), "use language instead of rdf:langString"));
        }
        if let Some(lang) = &raw.language {
            Literal::new("", None, Some(lang)).map_err(|e| invalid(format!("{path}.language"), e.to_string()))?;
        }

        let kind = if let Some(c) = raw.constant {
            let term = match term_type {
                TermType::Iri => Term::Iri(self.iri(&c, &format!("{path}.constant"))?),
                TermType::Literal => Term::Literal(
                    Literal::new(c, datatype.clone(), raw.language.as_deref())
                        .map_err(|e| invalid(format!("{path}.constant"), e.to_string()))?,
                ),
                TermType::Blank => {
                    let b = BlankNode::new(c).map_err(|e| invalid(format!("{path}.constant"), e.to_string()))?;
                    Term::BlankNode(b)
                }
            };
            TermMapKind::Constant(term)
        } else if let Some(r) = raw.reference {
            check_column(&r, profile, &format!("{path}.reference"))?;
            TermMapKind::Reference(r)
        } else if let Some(t) = raw.template {
            let t_path = format!("{path}.template");
            let mut template = Template::parse(&t).map_err(|e| err(&t_path, e.into()))?;
            for c in template.columns() {
                check_column(c, profile, &t_path)?;
            }
            if term_type == TermType::Iri {
                for (name, ns) in &self.prefixes {
                    template.expand_prefix(name, ns.as_str());
                }
            }
            TermMapKind::Template(template)
        } else {
            let f = raw.function.expect("counted above");
            let f_path = format!("{path}.function");
            if f.name.is_empty() {
                return Err(invalid(format!("{f_path}.name"), "function name is empty"));
            }
            let args = f
                .args
                .into_iter()
                .enumerate()
                .map(|(i, a)| self.term_map(a, profile, &format!("{f_path}.args[{i}]"), TermType::Literal))
                .collect::<Result<Vec<_>, _>>()?;
            TermMapKind::Function { name: f.name, args }
        };

        Ok(TermMap {
            kind,
            term_type,
            datatype,
            language: raw.language,
        })
    }
}

fn check_column(column: &str, profile: &TableProfile, path: &str) -> Result<(), MappingError> {
    if profile.column(column).is_none() {
        return Err(err(
            path,
            MappingErrorKind::UnknownColumn {
                column: column.to_string(),
                table: profile.kind(),
            },
        ));
    }
    Ok(())
}

/// Rejects any cycle in the child -> parent join graph, self-joins included.
fn check_join_cycles(maps: &[TriplesMap]) -> Result<(), MappingError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }

    fn visit(
        i: usize,
        maps: &[TriplesMap],
        marks: &mut [Mark],
        stack: &mut Vec<usize>,
    ) -> Result<(), MappingError> {
        marks[i] = Mark::Active;
        stack.push(i);
        for (j, pom) in maps[i].predicate_objects.iter().enumerate() {
            let ObjectMap::Join(join) = &pom.object else {
                continue;
            };
            match marks[join.parent_index] {
                Mark::Active => {
                    let start = stack.iter().position(|&k| k == join.parent_index).unwrap();
                    let mut cycle: Vec<String> = stack[start..].iter().map(|&k| maps[k].id.clone()).collect();
                    cycle.push(maps[join.parent_index].id.clone());
                    return Err(err(
                        format!("triplesMaps[{i}].predicateObjects[{j}].join"),
                        MappingErrorKind::CyclicJoin(cycle),
                    ));
                }
                Mark::New => visit(join.parent_index, maps, marks, stack)?,
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[i] = Mark::Done;
        Ok(())
    }

    let mut marks = vec![Mark::New; maps.len()];
    for i in 0..maps.len() {
        if marks[i] == Mark::New {
            visit(i, maps, &mut marks, &mut Vec::new())?;
        }
    }
    Ok(())
}

impl fmt::Display for TermMapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermMapKind::Constant(t) => write!(f, "constant {t}"),
            TermMapKind::Reference(c) => write!(f, "reference {c:?}"),
            TermMapKind::Template(t) => write!(f, "template {:?}", t.as_str()),
            TermMapKind::Function { name, .. } => write!(f, "function {name}"),
        }
    }
}
