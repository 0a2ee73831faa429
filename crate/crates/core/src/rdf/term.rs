use std::fmt;
use thiserror::Error;

use super::vocab::{rdf, xsd};

/// An absolute IRI, checked at the character-class level.
///
/// Validation is syntactic only: a scheme followed by `:`, and none of the
/// characters the N-Triples `IRIREF` production forbids (whitespace and other
/// control characters, `<>"{}|^\`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IriError {
    #[error("IRI is empty")]
    Empty,
    #[error("IRI {iri:?} has no scheme")]
    Relative { iri: String },
    #[error("IRI {iri:?} contains forbidden character {ch:?} at position {position}")]
    ForbiddenChar {
        iri: String,
        ch: char,
        position: usize,
    },
}

impl Iri {
    pub fn new(s: impl Into<String>) -> Result<Self, IriError> {
        let s = s.into();
        if s.is_empty() {
            return Err(IriError::Empty);
        }
        if let Some((position, ch)) = s.chars().enumerate().find(|&(_, c)| is_forbidden(c)) {
            return Err(IriError::ForbiddenChar { iri: s, ch, position });
        }
        if !has_scheme(&s) {
            return Err(IriError::Relative { iri: s });
        }
        Ok(Iri(s))
    }

    /// For compile-time vocabulary constants that are known to be valid.
    pub(crate) fn new_unchecked(s: impl Into<String>) -> Self {
        Iri(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The last path segment or fragment, used as a fallback display label.
    pub fn local_name(&self) -> &str {
        let s = self.0.trim_end_matches(['/', '#']);
        match s.rfind(['/', '#', ':']) {
            Some(i) if i + 1 < s.len() => &s[i + 1..],
            _ => s,
        }
    }
}

fn is_forbidden(c: char) -> bool {
    c <= ' ' || c == '\u{7f}' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '\\')
}

fn has_scheme(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// Validates a string as an absolute IRI.
pub fn make_iri(s: &str) -> Result<Iri, IriError> {
    Iri::new(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlankNode(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("blank node label {0:?} must match [A-Za-z0-9_]+")]
pub struct BlankNodeError(pub String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, BlankNodeError> {
        let label = label.into();
        if label.is_empty() || !label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(BlankNodeError(label));
        }
        Ok(BlankNode(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_:{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiteralError {
    #[error("language tag {0:?} conflicts with datatype {1}")]
    LanguageWithDatatype(String, Iri),
    #[error("rdf:langString literal requires a language tag")]
    LangStringWithoutLanguage,
    #[error("malformed language tag {0:?}")]
    BadLanguageTag(String),
}

impl Literal {
    pub fn new(
        lexical: impl Into<String>,
        datatype: Option<Iri>,
        language: Option<&str>,
    ) -> Result<Self, LiteralError> {
        let lexical = lexical.into();
        match (datatype, language) {
            (datatype, Some(lang)) => {
                if let Some(dt) = datatype {
                    if dt.as_str() != rdf::LANG_STRING {
                        return Err(LiteralError::LanguageWithDatatype(lang.to_string(), dt));
                    }
                }
                if !is_language_tag(lang) {
                    return Err(LiteralError::BadLanguageTag(lang.to_string()));
                }
                Ok(Literal {
                    lexical,
                    datatype: Iri::new_unchecked(rdf::LANG_STRING),
                    language: Some(lang.to_string()),
                })
            }
            (Some(dt), None) if dt.as_str() == rdf::LANG_STRING => {
                Err(LiteralError::LangStringWithoutLanguage)
            }
            (dt, None) => Ok(Literal {
                lexical,
                datatype: dt.unwrap_or_else(|| Iri::new_unchecked(xsd::STRING)),
                language: None,
            }),
        }
    }

    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Iri::new_unchecked(xsd::STRING),
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Result<Self, LiteralError> {
        Literal::new(lexical, Some(datatype), None)
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn is_simple(&self) -> bool {
        self.datatype.as_str() == xsd::STRING
    }
}

/// Builds a literal, defaulting the datatype to `xsd:string`.
pub fn make_literal(
    lexical: &str,
    datatype: Option<Iri>,
    language: Option<&str>,
) -> Result<Literal, LiteralError> {
    Literal::new(lexical, datatype, language)
}

fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let primary = parts.next().unwrap_or("");
    (1..=8).contains(&primary.len())
        && primary.bytes().all(|b| b.is_ascii_alphabetic())
        && parts.all(|p| (1..=8).contains(&p.len()) && p.bytes().all(|b| b.is_ascii_alphanumeric()))
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::ntriples::quote_literal(&self.lexical))?;
        if let Some(lang) = &self.language {
            write!(f, "@{lang}")
        } else if self.is_simple() {
            Ok(())
        } else {
            write!(f, "^^{}", self.datatype)
        }
    }
}

/// Any RDF term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    BlankNode(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    /// IRI string, blank label, or literal lexical form.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(i) => i.as_str(),
            Term::BlankNode(b) => b.label(),
            Term::Literal(l) => l.lexical(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => i.fmt(f),
            Term::BlankNode(b) => b.fmt(f),
            Term::Literal(l) => l.fmt(f),
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<BlankNode> for Term {
    fn from(b: BlankNode) -> Self {
        Term::BlankNode(b)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

/// Subject position: an IRI or a blank node, never a literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Iri(Iri),
    BlankNode(BlankNode),
}

impl From<Iri> for Subject {
    fn from(i: Iri) -> Self {
        Subject::Iri(i)
    }
}

impl From<BlankNode> for Subject {
    fn from(b: BlankNode) -> Self {
        Subject::BlankNode(b)
    }
}

impl From<Subject> for Term {
    fn from(s: Subject) -> Self {
        match s {
            Subject::Iri(i) => Term::Iri(i),
            Subject::BlankNode(b) => Term::BlankNode(b),
        }
    }
}

impl TryFrom<Term> for Subject {
    type Error = Literal;

    fn try_from(t: Term) -> Result<Self, Literal> {
        match t {
            Term::Iri(i) => Ok(Subject::Iri(i)),
            Term::BlankNode(b) => Ok(Subject::BlankNode(b)),
            Term::Literal(l) => Err(l),
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Iri(i) => i.fmt(f),
            Subject::BlankNode(b) => b.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Subject,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Subject>, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject: subject.into(),
            predicate,
            object: object.into(),
        }
    }
}

impl fmt::Display for Triple {
    /// The triple as one N-Triples line, without the trailing newline.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
