use std::fmt;
use thiserror::Error;

use crate::tabular::Record;

/// A string template with `{column}` placeholders, parsed once at load time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    source: String,
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Column(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unbalanced brace at byte {0}")]
    Unbalanced(usize),
    #[error("empty placeholder at byte {0}")]
    EmptyPlaceholder(usize),
}

impl Template {
    /// Parses a template. `\{` and `\}` produce literal braces.
    pub fn parse(source: &str) -> Result<Self, TemplateError> {
        let mut segments = Vec::new();
        let mut text = String::new();
        let mut chars = source.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' if matches!(chars.peek(), Some((_, '{' | '}'))) => {
                    text.push(chars.next().unwrap().1);
                }
                '{' => {
                    let mut name = String::new();
                    loop {
                        match chars.next() {
                            Some((_, '}')) => break,
                            Some((j, '{')) => return Err(TemplateError::Unbalanced(j)),
                            Some((_, c)) => name.push(c),
                            None => return Err(TemplateError::Unbalanced(i)),
                        }
                    }
                    if name.is_empty() {
                        return Err(TemplateError::EmptyPlaceholder(i));
                    }
                    if !text.is_empty() {
                        segments.push(Segment::Text(std::mem::take(&mut text)));
                    }
                    segments.push(Segment::Column(name));
                }
                '}' => return Err(TemplateError::Unbalanced(i)),
                c => text.push(c),
            }
        }
        if !text.is_empty() {
            segments.push(Segment::Text(text));
        }
        Ok(Template {
            source: source.to_string(),
            segments,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// Column names referenced by placeholders, in order of appearance.
    pub fn columns(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Column(c) => Some(c.as_str()),
            Segment::Text(_) => None,
        })
    }

    /// Replaces the leading `prefix:` of the template's first text segment.
    pub(crate) fn expand_prefix(&mut self, prefix: &str, namespace: &str) {
        let Some(source_rest) = self.source.strip_prefix(prefix).and_then(|r| r.strip_prefix(':')) else {
            return;
        };
        if let Some(Segment::Text(first)) = self.segments.first_mut() {
            if let Some(rest) = first.strip_prefix(prefix).and_then(|r| r.strip_prefix(':')) {
                *first = format!("{namespace}{rest}");
                self.source = format!("{namespace}{source_rest}");
            }
        }
    }

    /// Fills the placeholders from `record`.
    ///
    /// Returns `None` when any referenced column has no value or more than
    /// one. With `iri_safe`, substituted values are percent-encoded.
    pub fn expand(&self, record: &Record, iri_safe: bool) -> Option<String> {
        let mut out = String::new();
        for segment in &self.segments {
            match segment {
                Segment::Text(t) => out.push_str(t),
                Segment::Column(c) => match record.values(c) {
                    [value] if iri_safe => out.push_str(&percent_encode(value)),
                    [value] => out.push_str(value),
                    _ => return None,
                },
            }
        }
        Some(out)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Expands `template` against `record`; see [`Template::expand`].
pub fn expand_template(
    template: &str,
    record: &Record,
    iri_safe: bool,
) -> Result<Option<String>, TemplateError> {
    Ok(Template::parse(template)?.expand(record, iri_safe))
}

/// Percent-encodes everything except the unreserved characters
/// `A-Z a-z 0-9 - . _ ~`, byte by byte over the UTF-8 encoding.
pub fn percent_encode(value: &str) -> String {
    const HEX: &[u8; 16] = b"0123456789ABCDEF";
    let mut out = String::with_capacity(value.len());
    for &b in value.as_bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push('%');
            out.push(HEX[(b >> 4) as usize] as char);
            out.push(HEX[(b & 0xf) as usize] as char);
        }
    }
    out
}
