use std::collections::BTreeMap;

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::Variable;
use crate::rdf::vocab::{rdf, xsd};
use crate::rdf::{BlankNode, Iri, Literal, Term};

/// One row of a result set. Unbound variables are absent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SolutionMapping(BTreeMap<Variable, Term>);

impl SolutionMapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &Variable) -> Option<&Term> {
        self.0.get(var)
    }

    /// Looks a variable up by name, without the `?`.
    pub fn value(&self, name: &str) -> Option<&Term> {
        self.0.get(&Variable::new(name))
    }

    pub fn insert(&mut self, var: Variable, term: Term) -> Option<Term> {
        self.0.insert(var, term)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Variable, Term)> for SolutionMapping {
    fn from_iter<I: IntoIterator<Item = (Variable, Term)>>(iter: I) -> Self {
        SolutionMapping(iter.into_iter().collect())
    }
}

/// Variables in projection order plus the solution sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultSet {
    variables: Vec<Variable>,
    solutions: Vec<SolutionMapping>,
}

impl ResultSet {
    pub fn new(variables: Vec<Variable>, solutions: Vec<SolutionMapping>) -> Self {
        ResultSet { variables, solutions }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn solutions(&self) -> &[SolutionMapping] {
        &self.solutions
    }

    pub fn into_solutions(self) -> Vec<SolutionMapping> {
        self.solutions
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }
}

#[derive(Serialize)]
struct JsonTerm<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    value: &'a str,
    #[serde(rename = "xml:lang", skip_serializing_if = "Option::is_none")]
    lang: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    datatype: Option<&'a str>,
}

fn json_term(t: &Term) -> JsonTerm<'_> {
    match t {
        Term::Iri(i) => JsonTerm {
            kind: "uri",
            value: i.as_str(),
            lang: None,
            datatype: None,
        },
        Term::BlankNode(b) => JsonTerm {
            kind: "bnode",
            value: b.label(),
            lang: None,
            datatype: None,
        },
        Term::Literal(l) => JsonTerm {
            kind: "literal",
            value: l.lexical(),
            lang: l.language(),
            datatype: (l.language().is_none() && !l.is_simple()).then(|| l.datatype().as_str()),
        },
    }
}

struct Row<'a> {
    vars: &'a [Variable],
    solution: &'a SolutionMapping,
}

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        for v in self.vars {
            if let Some(t) = self.solution.get(v) {
                map.serialize_entry(v.name(), &json_term(t))?;
            }
        }
        map.end()
    }
}

#[derive(Serialize)]
struct Document<'a> {
    head: Head<'a>,
    results: Results<'a>,
}

#[derive(Serialize)]
struct Head<'a> {
    vars: Vec<&'a str>,
}

#[derive(Serialize)]
struct Results<'a> {
    bindings: Vec<Row<'a>>,
}

/// Serializes in the SPARQL 1.1 JSON results format, compactly.
///
/// Keys appear in a fixed order (`type`, `value`, then `xml:lang` or
/// `datatype`); `datatype` is omitted for `xsd:string`, and unbound
/// variables are omitted from their row.
pub fn serialize_results_json(rs: &ResultSet) -> String {
    let doc = Document {
        head: Head {
            vars: rs.variables.iter().map(Variable::name).collect(),
        },
        results: Results {
            bindings: rs
                .solutions
                .iter()
                .map(|solution| Row {
                    vars: &rs.variables,
                    solution,
                })
                .collect(),
        },
    };
    serde_json::to_string(&doc).expect("result documents always serialize")
}

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("malformed results document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("results document has no bindings (boolean result?)")]
    NoBindings,
    #[error("variable {var}: {message}")]
    Term { var: String, message: String },
}

#[derive(Deserialize)]
struct InDocument {
    head: InHead,
    results: Option<InResults>,
}

#[derive(Deserialize)]
struct InHead {
    #[serde(default)]
    vars: Vec<String>,
}

#[derive(Deserialize)]
struct InResults {
    bindings: Vec<BTreeMap<String, InTerm>>,
}

#[derive(Deserialize)]
struct InTerm {
    #[serde(rename = "type")]
    kind: String,
    value: String,
    #[serde(rename = "xml:lang")]
    lang: Option<String>,
    datatype: Option<String>,
}

/// Parses a SPARQL 1.1 JSON results document.
///
/// Blank node labels from other stores may use characters this crate does
/// not allow in labels; those characters are replaced by `_`.
pub fn parse_results_json(text: &str) -> Result<ResultSet, ResultsError> {
    let doc: InDocument = serde_json::from_str(text)?;
    let results = doc.results.ok_or(ResultsError::NoBindings)?;
    let variables: Vec<Variable> = doc.head.vars.into_iter().map(Variable::new).collect();
    let mut solutions = Vec::with_capacity(results.bindings.len());
    for row in results.bindings {
        let mut s = SolutionMapping::new();
        for (var, t) in row {
            let term = in_term(t).map_err(|message| ResultsError::Term {
                var: var.clone(),
                message,
            })?;
            s.insert(Variable::new(var), term);
        }
        solutions.push(s);
    }
    Ok(ResultSet::new(variables, solutions))
}

fn in_term(t: InTerm) -> Result<Term, String> {
    match t.kind.as_str() {
        "uri" => Iri::new(t.value).map(Term::Iri).map_err(|e| e.to_string()),
        "bnode" => {
            let label: String = t
                .value
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
                .collect();
            let label = if label.is_empty() { "_".to_string() } else { label };
            BlankNode::new(label).map(Term::BlankNode).map_err(|e| e.to_string())
        }
        "literal" | "typed-literal" => {
            let datatype = match t.datatype.as_deref() {
                None => None,
                Some(dt) if dt == rdf::LANG_STRING && t.lang.is_some() => None,
                Some(dt) if dt == xsd::STRING => None,
                Some(dt) => Some(Iri::new(dt).map_err(|e| e.to_string())?),
            };
            Literal::new(t.value, datatype, t.lang.as_deref())
                .map(Term::Literal)
                .map_err(|e| e.to_string())
        }
        other => Err(format!("unknown term type {other:?}")),
    }
}
