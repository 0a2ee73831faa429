//! Strict RFC 4180 reader and writer.
//!
//! The reader insists on a header row, rejects stray quotes inside unquoted
//! fields, and requires every record to have exactly as many cells as the
//! header. Both `\n` and `\r\n` line endings are accepted; a single trailing
//! line break after the last record is optional.

use thiserror::Error;

/// A parsed CSV table: header names plus raw (unnormalized) rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CsvError {
    #[error("input is not valid UTF-8 (byte offset {offset})")]
    Encoding { offset: usize },
    #[error("missing header row")]
    MissingHeader,
    /// `row` counts data rows from 1; the header is row 0.
    #[error("malformed quoting at row {row}: {message}")]
    Quoting { row: usize, message: &'static str },
    #[error("row {row} has {found} cells, header has {expected}")]
    Arity {
        row: usize,
        expected: usize,
        found: usize,
    },
}

impl CsvError {
    /// Data row the error refers to, when it refers to one.
    pub fn row(&self) -> Option<usize> {
        match self {
            CsvError::Quoting { row, .. } | CsvError::Arity { row, .. } => Some(*row),
            _ => None,
        }
    }
}

/// Parses UTF-8 CSV bytes into a [`Table`].
pub fn parse_csv(bytes: &[u8]) -> Result<Table, CsvError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CsvError::Encoding {
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.is_empty() {
        return Err(CsvError::MissingHeader);
    }

    let mut records = Reader::new(text).records()?;
    let header = records.remove(0);
    let expected = header.len();
    for (i, record) in records.iter().enumerate() {
        if record.len() != expected {
            return Err(CsvError::Arity {
                row: i + 1,
                expected,
                found: record.len(),
            });
        }
    }
    Ok(Table {
        header,
        rows: records,
    })
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    row: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            row: 0,
        }
    }

    fn records(mut self) -> Result<Vec<Vec<String>>, CsvError> {
        let mut out = Vec::new();
        while self.chars.peek().is_some() {
            out.push(self.record()?);
            self.row += 1;
        }
        Ok(out)
    }

    /// Reads one record including its terminating line break (if any).
    fn record(&mut self) -> Result<Vec<String>, CsvError> {
        let mut cells = Vec::new();
        loop {
            let cell = self.field()?;
            cells.push(cell);
            match self.chars.next() {
                Some(',') => continue,
                Some('\r') => {
                    if self.chars.peek() == Some(&'\n') {
                        self.chars.next();
                    }
                    return Ok(cells);
                }
                Some('\n') | None => return Ok(cells),
                Some(_) => unreachable!("field() stops only at separators"),
            }
        }
    }

    fn field(&mut self) -> Result<String, CsvError> {
        let mut cell = String::new();
        if self.chars.peek() == Some(&'"') {
            self.chars.next();
            loop {
                match self.chars.next() {
                    Some('"') => {
                        if self.chars.peek() == Some(&'"') {
                            self.chars.next();
                            cell.push('"');
                        } else {
                            break;
                        }
                    }
                    Some(c) => cell.push(c),
                    None => {
                        return Err(CsvError::Quoting {
                            row: self.row,
                            message: "unterminated quoted field",
                        })
                    }
                }
            }
            match self.chars.peek() {
                None | Some(',') | Some('\n') | Some('\r') => Ok(cell),
                Some(_) => Err(CsvError::Quoting {
                    row: self.row,
                    message: "characters after closing quote",
                }),
            }
        } else {
            while let Some(&c) = self.chars.peek() {
                match c {
                    ',' | '\n' | '\r' => break,
                    '"' => {
                        return Err(CsvError::Quoting {
                            row: self.row,
                            message: "quote inside unquoted field",
                        })
                    }
                    _ => {
                        cell.push(c);
                        self.chars.next();
                    }
                }
            }
            Ok(cell)
        }
    }
}

/// Writes a table back as RFC 4180 text with `\r\n` line breaks.
///
/// Cells are quoted only when they contain a comma, quote, or line break.
pub fn write_csv(table: &Table) -> String {
    let mut out = String::new();
    write_record(&mut out, &table.header);
    for row in &table.rows {
        write_record(&mut out, row);
    }
    out
}

fn write_record(out: &mut String, cells: &[String]) {
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        // A lone empty cell would otherwise read back as a blank line.
        let needs_quotes = cell.contains([',', '"', '\n', '\r']) || (cells.len() == 1 && cell.is_empty());
        if needs_quotes {
            out.push('"');
            out.push_str(&cell.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(cell);
        }
    }
    out.push_str("\r\n");
}
