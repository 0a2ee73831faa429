//! Catalog table ingest: CSV parsing, profile validation, and cell
//! normalization into [`Record`]s.

mod csv;
mod normalize;

pub use self::csv::{parse_csv, write_csv, CsvError, Table};
pub use self::normalize::{
    normalize_cell, normalize_date, ColumnSpec, DateError, NormalizedCell, Normalizer,
};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const DEFAULT_SEPARATOR: &str = ";";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    /// Descriptive metadata, one row per catalog object.
    Object,
    /// Digitization records, one row per object and stage.
    Process,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::Object => "object",
            TableKind::Process => "process",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("column name must be non-empty")]
    EmptyColumnName,
    #[error("column {0:?} declared twice")]
    DuplicateColumn(String),
    #[error("key column {0:?} is not a declared column")]
    UnknownKeyColumn(String),
    #[error("key column {0:?} must be required")]
    OptionalKeyColumn(String),
}

/// Column inventory of one catalog table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct TableProfile {
    kind: TableKind,
    columns: Vec<ColumnSpec>,
    key_column: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    kind: TableKind,
    columns: Vec<ColumnSpec>,
    key_column: String,
}

impl TryFrom<RawProfile> for TableProfile {
    type Error = ProfileError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        TableProfile::new(raw.kind, raw.columns, raw.key_column)
    }
}

impl TableProfile {
    pub fn new(
        kind: TableKind,
        columns: Vec<ColumnSpec>,
        key_column: impl Into<String>,
    ) -> Result<Self, ProfileError> {
        let key_column = key_column.into();
        let mut seen = HashSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(ProfileError::EmptyColumnName);
            }
            if !seen.insert(c.name.as_str()) {
                return Err(ProfileError::DuplicateColumn(c.name.clone()));
            }
        }
        match columns.iter().find(|c| c.name == key_column) {
            None => return Err(ProfileError::UnknownKeyColumn(key_column)),
            Some(c) if !c.required => return Err(ProfileError::OptionalKeyColumn(key_column)),
            Some(_) => {}
        }
        Ok(TableProfile {
            kind,
            columns,
            key_column,
        })
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn key_column(&self) -> &str {
        &self.key_column
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// A normalized table row.
///
/// `row` is the 1-based data row number in the source CSV (the header is
/// row 0); absent columns are simply missing from `values`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    row: usize,
    key: String,
    values: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("record key must be non-empty")]
pub struct EmptyKey;

impl Record {
    pub fn new(
        row: usize,
        key: impl Into<String>,
        values: BTreeMap<String, Vec<String>>,
    ) -> Result<Self, EmptyKey> {
        let key = key.into();
        if key.is_empty() {
            return Err(EmptyKey);
        }
        let values = values.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        Ok(Record { row, key, values })
    }

    pub fn row(&self) -> usize {
        self.row
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    /// Values of a column; empty when the column is absent.
    pub fn values(&self, column: &str) -> &[String] {
        self.values.get(column).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Checks the record against its profile: known columns only, and every
    /// required column present.
    pub fn conforms_to(&self, profile: &TableProfile) -> bool {
        self.values.keys().all(|k| profile.column(k).is_some())
            && profile
                .columns()
                .iter()
                .filter(|c| c.required)
                .all(|c| !self.values(&c.name).is_empty())
    }
}

/// The five stages a digitized object passes through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DigitizationStage {
    Raw,
    RawProcessed,
    Dcho,
    DchoOptimized,
    Export,
}

impl DigitizationStage {
    pub const ALL: [DigitizationStage; 5] = [
        DigitizationStage::Raw,
        DigitizationStage::RawProcessed,
        DigitizationStage::Dcho,
        DigitizationStage::DchoOptimized,
        DigitizationStage::Export,
    ];

    /// The catalog's label for the stage (`RAW`, `RAWp`, `DCHO`, `DCHOo`, `export`).
    pub fn alias(self) -> &'static str {
        match self {
            DigitizationStage::Raw => "RAW",
            DigitizationStage::RawProcessed => "RAWp",
            DigitizationStage::Dcho => "DCHO",
            DigitizationStage::DchoOptimized => "DCHOo",
            DigitizationStage::Export => "export",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            DigitizationStage::Raw => "raw",
            DigitizationStage::RawProcessed => "raw-processed",
            DigitizationStage::Dcho => "dcho",
            DigitizationStage::DchoOptimized => "dcho-optimized",
            DigitizationStage::Export => "export",
        }
    }
}

impl fmt::Display for DigitizationStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.alias())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown digitization stage {0:?}")]
pub struct UnknownStage(pub String);

impl FromStr for DigitizationStage {
    type Err = UnknownStage;

    /// Accepts the catalog aliases and the slugs, case-sensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DigitizationStage::ALL
            .into_iter()
            .find(|st| st.alias() == s || st.slug() == s)
            .ok_or_else(|| UnknownStage(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueKind {
    MissingRequired,
    MissingColumn,
    UnknownColumn,
    DuplicateKey,
    NormalizerFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl IssueKind {
    /// Errors stop a build; warnings only degrade the affected rows.
    pub fn severity(self) -> Severity {
        match self {
            IssueKind::DuplicateKey | IssueKind::MissingColumn => Severity::Error,
            IssueKind::MissingRequired | IssueKind::UnknownColumn | IssueKind::NormalizerFailure => {
                Severity::Warning
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    /// Data row (1-based); 0 for header-level issues.
    pub row: usize,
    pub column: String,
    pub kind: IssueKind,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn from_issues(issues: Vec<Issue>) -> Self {
        ValidationReport {
            ok: issues.is_empty(),
            issues,
        }
    }

    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Error)
    }
}

fn issue(row: usize, column: &str, kind: IssueKind, message: String) -> Issue {
    Issue {
        row,
        column: column.to_string(),
        kind,
        severity: kind.severity(),
        message,
    }
}

/// Checks a parsed table against its profile, reporting every problem found.
pub fn validate_table(table: &Table, profile: &TableProfile, separator: &str) -> ValidationReport {
    ingest(table, profile, separator).1
}

/// Normalizes every row into a [`Record`] and validates the table in one pass.
///
/// Rows whose key cell is empty produce no record (the issue is reported).
/// Rows with other problems still yield a record holding whatever values
/// survived normalization.
pub fn ingest(
    table: &Table,
    profile: &TableProfile,
    separator: &str,
) -> (Vec<Record>, ValidationReport) {
    let mut issues = Vec::new();

    let positions: HashMap<&str, usize> = table
        .header
        .iter()
        .enumerate()
        .map(|(i, h)| (h.as_str(), i))
        .collect();
    for name in &table.header {
        if profile.column(name).is_none() {
            issues.push(issue(
                0,
                name,
                IssueKind::UnknownColumn,
                format!("column {name:?} is not part of the {} profile", profile.kind()),
            ));
        }
    }
    for spec in profile.columns() {
        if spec.required && !positions.contains_key(spec.name.as_str()) {
            issues.push(issue(
                0,
                &spec.name,
                IssueKind::MissingColumn,
                format!("required column {:?} is missing from the header", spec.name),
            ));
        }
    }

    let mut records = Vec::with_capacity(table.rows.len());
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    for (i, raw_row) in table.rows.iter().enumerate() {
        let row = i + 1;
        let mut values = BTreeMap::new();
        for spec in profile.columns() {
            let Some(&pos) = positions.get(spec.name.as_str()) else {
                continue;
            };
            let cell = normalize_cell(&raw_row[pos], spec, separator);
            for rejected in &cell.rejected {
                issues.push(issue(row, &spec.name, IssueKind::NormalizerFailure, rejected.to_string()));
            }
            if cell.values.is_empty() {
                if spec.required && positions.contains_key(spec.name.as_str()) {
                    issues.push(issue(
                        row,
                        &spec.name,
                        IssueKind::MissingRequired,
                        format!("required column {:?} has no value", spec.name),
                    ));
                }
            } else {
                values.insert(spec.name.clone(), cell.values);
            }
        }

        let key = values
            .get(profile.key_column())
            .and_then(|v| v.first())
            .cloned();
        let Some(key) = key else {
            continue;
        };
        if profile.kind() == TableKind::Object {
            if let Some(&first) = first_seen.get(&key) {
                issues.push(issue(
                    row,
                    profile.key_column(),
                    IssueKind::DuplicateKey,
                    format!("key {key:?} already used at row {first}"),
                ));
            } else {
                first_seen.insert(key.clone(), row);
            }
        }
        records.push(Record::new(row, key, values).expect("key checked non-empty"));
    }

    (records, ValidationReport::from_issues(issues))
}
