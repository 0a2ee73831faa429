use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How the raw text of a cell is cleaned before it reaches the mapping stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalizer {
    #[default]
    None,
    Date,
    TrimmedText,
}

/// One column of a [`TableProfile`](super::TableProfile).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(default)]
    pub required: bool,
    #[serde(default)]
    pub multivalued: bool,
    #[serde(default)]
    pub normalizer: Normalizer,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            required: false,
            multivalued: false,
            normalizer: Normalizer::None,
        }
    }

    pub fn required(mut self) -> Self {
        self.required = true;
        self
    }

    pub fn multivalued(mut self) -> Self {
        self.multivalued = true;
        self
    }

    pub fn normalizer(mut self, normalizer: Normalizer) -> Self {
        self.normalizer = normalizer;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot read {raw:?} as a date (expected D/M/YYYY, YYYY-MM-DD or YYYY)")]
pub struct DateError {
    pub raw: String,
}

/// Result of normalizing one cell: the surviving values, plus every segment
/// the column's normalizer rejected.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalizedCell {
    pub values: Vec<String>,
    pub rejected: Vec<DateError>,
}

/// Splits, trims and normalizes a raw cell.
///
/// Whitespace-only cells are absent. Multivalued columns split on
/// `separator`; empty segments are dropped. Values are always trimmed, so no
/// returned value is empty or padded.
pub fn normalize_cell(raw: &str, spec: &ColumnSpec, separator: &str) -> NormalizedCell {
    assert!(!separator.is_empty(), "multivalue separator must be non-empty");
    let segments: Vec<&str> = if spec.multivalued {
        raw.split(separator).collect()
    } else {
        vec![raw]
    };

    let mut cell = NormalizedCell::default();
    for segment in segments {
        let segment = segment.trim();
        if segment.is_empty() {
            continue;
        }
        match spec.normalizer {
            Normalizer::None => cell.values.push(segment.to_string()),
            Normalizer::TrimmedText => cell.values.push(collapse_whitespace(segment)),
            Normalizer::Date => match normalize_date(segment) {
                Ok(date) => cell.values.push(date),
                Err(e) => cell.rejected.push(e),
            },
        }
    }
    cell
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Converts a day/month/year, ISO, or year-only date to ISO-8601.
///
/// `05/03/2023`, `5-3-2023` and `05.03.2023` all read as 5 March 2023.
/// Year-only input stays a bare four-digit year.
pub fn normalize_date(raw: &str) -> Result<String, DateError> {
    let s = raw.trim();
    let fail = || DateError {
        raw: raw.to_string(),
    };
    let all_digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());

    if s.len() == 4 && all_digits(s) {
        return Ok(s.to_string());
    }

    let parts: Vec<&str> = s.split(['/', '-', '.']).collect();
    if parts.len() != 3 || !parts.iter().all(|p| all_digits(p)) {
        return Err(fail());
    }
    let (year, month, day) = if parts[0].len() == 4 {
        if parts[1].len() != 2 || parts[2].len() != 2 || !s.contains('-') {
            return Err(fail());
        }
        (parts[0], parts[1], parts[2])
    } else if parts[2].len() == 4 && parts[0].len() <= 2 && parts[1].len() <= 2 {
        (parts[2], parts[1], parts[0])
    } else {
        return Err(fail());
    };

    let year: u32 = year.parse().map_err(|_| fail())?;
    let month: u32 = month.parse().map_err(|_| fail())?;
    let day: u32 = day.parse().map_err(|_| fail())?;
    if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
        return Err(fail());
    }
    Ok(format!("{year:04}-{month:02}-{day:02}"))
}

fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        4 | 6 | 9 | 11 => 30,
        2 if (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400) => 29,
        2 => 28,
        _ => 31,
    }
}
