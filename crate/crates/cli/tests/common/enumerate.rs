//! Hand-written enumeration of the triples the fixture mapping should
//! produce. Reads the CSVs with the `csv` crate and applies the mapping rules
//! spelled out below, independently of the library's ingest and mapping code.

use std::collections::BTreeSet;

const EX: &str = "http://example.org/heritage/";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

pub const OBJECT_COLUMNS: [&str; 7] = ["id", "title", "type", "material", "dimension", "date", "conservation_place"];

/// An object-table cell: 0-based data row and column name.
pub type CellRef = (usize, &'static str);

#[derive(Debug, Clone)]
pub struct Derived {
    pub line: String,
    /// Object-table cells this triple depends on.
    pub cells: BTreeSet<CellRef>,
}

pub fn read_rows(csv_bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_bytes);
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

pub fn write_rows(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).unwrap();
    for r in rows {
        w.write_record(r).unwrap();
    }
    w.into_inner().unwrap()
}

fn segment(s: &str) -> &str {
    assert!(
        s.chars().all(|c| c.is_ascii_alphanumeric() || "-._~".contains(c)),
        "oracle only handles unreserved IRI segments: {s:?}"
    );
    s
}

fn iri(s: &str) -> String {
    format!("<{s}>")
}

fn literal(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn typed(s: &str, datatype: &str) -> String {
    format!("{}^^<{XSD}{datatype}>", literal(s))
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `YYYY` stays a year; `D/M/YYYY` and `YYYY-MM-DD` become dates.
fn iso(raw: &str) -> Option<(String, &'static str)> {
    let s = raw.trim();
    if s.is_empty() {
        return None;
    }
    if s.len() == 4 && s.chars().all(|c| c.is_ascii_digit()) {
        return Some((s.to_string(), "gYear"));
    }
    if let [d, m, y] = s.split('/').collect::<Vec<_>>()[..] {
        let n = |x: &str| x.parse::<u32>().unwrap();
        return Some((format!("{:04}-{:02}-{:02}", n(y), n(m), n(d)), "date"));
    }
    assert!(s.len() == 10 && &s[4..5] == "-" && &s[7..8] == "-", "unexpected date {s:?}");
    Some((s.to_string(), "date"))
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

pub fn enumerate(objects_csv: &[u8], process_csv: &[u8]) -> Vec<Derived> {
    let (oh, orows) = read_rows(objects_csv);
    let (ph, prows) = read_rows(process_csv);
    let mut out = Vec::new();
    let mut emit = |s: &str, p: &str, o: String, cells: &[CellRef]| {
        out.push(Derived {
            line: format!("{} {} {o} .", iri(s), iri(p)),
            cells: cells.iter().copied().collect(),
        });
    };

    let mut object_iris: Vec<(String, usize)> = Vec::new();
    for (i, row) in orows.iter().enumerate() {
        let cell = |name: &str| row[col(&oh, name)].trim().to_string();
        let id = cell("id");
        if id.is_empty() {
            continue;
        }
        let s = format!("{EX}object/{}", segment(&id));
        object_iris.push((id.clone(), i));
        let key = (i, "id");
        emit(&s, RDF_TYPE, iri(&format!("{EX}PhysicalObject")), &[key]);
        emit(&s, &format!("{EX}identifier"), literal(&id), &[key]);
        for (column, predicate) in [
            ("title", "title"),
            ("type", "objectType"),
            ("dimension", "dimension"),
            ("conservation_place", "conservationPlace"),
        ] {
            let v = collapse(&cell(column));
            if !v.is_empty() {
                let c = *OBJECT_COLUMNS.iter().find(|c| **c == column).unwrap();
                emit(&s, &format!("{EX}{predicate}"), literal(&v), &[key, (i, c)]);
            }
        }
        for m in cell("material").split(';').map(collapse).filter(|m| !m.is_empty()) {
            emit(&s, &format!("{EX}material"), literal(&m), &[key, (i, "material")]);
        }
        if let Some((v, dt)) = iso(&cell("date")) {
            emit(&s, &format!("{EX}date"), typed(&v, dt), &[key, (i, "date")]);
        }
    }

    for row in &prows {
        let cell = |name: &str| row[col(&ph, name)].trim().to_string();
        let (oid, stage) = (cell("object_id"), cell("stage"));
        if oid.is_empty() || stage.is_empty() {
            continue;
        }
        let s = format!("{EX}process/{}/{}", segment(&oid), segment(&stage));
        emit(&s, RDF_TYPE, iri(&format!("{EX}DigitizationActivity")), &[]);
        for (id, i) in object_iris.iter().filter(|(id, _)| *id == oid) {
            emit(&s, &format!("{EX}digitizes"), iri(&format!("{EX}object/{id}")), &[(*i, "id")]);
        }
        emit(&s, &format!("{EX}stage"), literal(&stage), &[]);
        let technique = collapse(&cell("technique"));
        if !technique.is_empty() {
            emit(&s, &format!("{EX}technique"), literal(&technique), &[]);
        }
        let format = cell("output_format");
        if !format.is_empty() {
            emit(&s, &format!("{EX}outputFormat"), literal(&format), &[]);
        }
        if let Some((v, _)) = iso(&cell("date")) {
            emit(&s, &format!("{EX}date"), typed(&v, "date"), &[]);
        }
    }
    out
}

/// Canonical N-Triples text: sorted distinct lines, newline-terminated.
pub fn canonical(derived: &[Derived]) -> String {
    let lines: BTreeSet<&str> = derived.iter().map(|d| d.line.as_str()).collect();
    lines.into_iter().map(|l| format!("{l}\n")).collect()
}
