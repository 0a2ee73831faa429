//! Canonical N-Triples output and a line-oriented N-Triples parser.

use thiserror::Error;

use super::graph::Graph;
use super::term::{BlankNode, Iri, Literal, Subject, Term, Triple};

/// Serializes a graph as canonical N-Triples: one triple per line, lines
/// sorted bytewise, every line terminated by `\n`.
pub fn serialize_ntriples(graph: &Graph) -> String {
    let mut lines: Vec<String> = graph.iter().map(|t| t.to_string()).collect();
    lines.sort_unstable();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Quotes a lexical form with the escapes N-Triples requires.
///
/// `"` `\` LF CR use their two-character escapes, as do BS TAB FF; the
/// remaining C0 controls and DEL are written as `\u00XX`.
pub(crate) fn quote_literal(lexical: &str) -> String {
    let mut out = String::with_capacity(lexical.len() + 2);
    out.push('"');
    for c in lexical.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if c < ' ' || c == '\u{7f}' => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("N-Triples syntax error at line {line}, column {column}: {message}")]
pub struct NTriplesError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Parses N-Triples text. Comments and blank lines are skipped.
pub fn parse_ntriples(text: &str) -> Result<Graph, NTriplesError> {
    let mut graph = Graph::new();
    for (i, line) in text.lines().enumerate() {
        let mut p = LineParser {
            line: i + 1,
            src: line,
            pos: 0,
        };
        if let Some(triple) = p.statement()? {
            graph.insert(triple);
        }
    }
    Ok(graph)
}

struct LineParser<'a> {
    line: usize,
    src: &'a str,
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, NTriplesError> {
        Err(NTriplesError {
            line: self.line,
            column: self.src[..self.pos].chars().count() + 1,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn at_end_or_comment(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), None | Some('#'))
    }

    fn statement(&mut self) -> Result<Option<Triple>, NTriplesError> {
        if self.at_end_or_comment() {
            return Ok(None);
        }
        let subject = match self.peek() {
            Some('<') => Subject::Iri(self.iri()?),
            Some('_') => Subject::BlankNode(self.blank()?),
            _ => return self.err("expected IRI or blank node as subject"),
        };
        self.skip_ws();
        let predicate = match self.peek() {
            Some('<') => self.iri()?,
            _ => return self.err("expected IRI as predicate"),
        };
        self.skip_ws();
        let object = match self.peek() {
            Some('<') => Term::Iri(self.iri()?),
            Some('_') => Term::BlankNode(self.blank()?),
            Some('"') => Term::Literal(self.literal()?),
            _ => return self.err("expected IRI, blank node or literal as object"),
        };
        self.skip_ws();
        if self.bump() != Some('.') {
            return self.err("expected '.' after object");
        }
        if !self.at_end_or_comment() {
            return self.err("unexpected content after '.'");
        }
        Ok(Some(Triple {
            subject,
            predicate,
            object,
        }))
    }

    fn iri(&mut self) -> Result<Iri, NTriplesError> {
        let start = self.pos;
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => value.push(self.uchar()?),
                Some(c) => value.push(c),
                None => return self.err("unterminated IRI"),
            }
        }
        Iri::new(value).or_else(|e| {
            self.pos = start;
            self.err(e.to_string())
        })
    }

    fn blank(&mut self) -> Result<BlankNode, NTriplesError> {
        if !self.rest().starts_with("_:") {
            return self.err("expected '_:'");
        }
        self.pos += 2;
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        BlankNode::new(&self.src[start..self.pos]).or_else(|e| self.err(e.to_string()))
    }

    fn literal(&mut self) -> Result<Literal, NTriplesError> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            lexical.push(self.uchar()?);
                            continue;
                        }
                        _ => return self.err("invalid escape sequence"),
                    };
                    self.bump();
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
                None => return self.err("unterminated literal"),
            }
        }
        let result = match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.pos += 1;
                }
                Literal::new(lexical, None, Some(&self.src[start..self.pos]))
            }
            Some('^') => {
                if !self.rest().starts_with("^^<") {
                    return self.err("expected '^^<' before datatype");
                }
                self.pos += 2;
                let dt = self.iri()?;
                Literal::new(lexical, Some(dt), None)
            }
            _ => Ok(Literal::simple(lexical)),
        };
        result.or_else(|e| self.err(e.to_string()))
    }

    /// Reads `uXXXX` or `UXXXXXXXX` after a backslash.
    fn uchar(&mut self) -> Result<char, NTriplesError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return self.err("expected \\u or \\U escape"),
        };
        let hex = self.rest().get(..width).unwrap_or("");
        if hex.len() != width || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return self.err("malformed unicode escape");
        }
        self.pos += width;
        u32::from_str_radix(hex, 16)
            .ok()
            .and_then(char::from_u32)
            .map_or_else(|| self.err("escape is not a unicode scalar value"), Ok)
    }
}
