use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

use super::document::{MappingDocument, ObjectMap, TermMap, TermMapKind, TermType, TriplesMap};
use super::functions::FunctionRegistry;
use crate::rdf::vocab::rdf;
use crate::rdf::{BlankNode, Graph, Iri, Literal, Subject, Term, Triple};
use crate::tabular::{Record, TableKind};

/// Normalized records for each table kind.
#[derive(Debug, Clone, Default)]
pub struct Datasets {
    tables: BTreeMap<TableKind, Vec<Record>>,
}

impl Datasets {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, kind: TableKind, records: Vec<Record>) -> Self {
        self.tables.insert(kind, records);
        self
    }

    pub fn records(&self, kind: TableKind) -> &[Record] {
        self.tables.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    Sequential,
    /// One task per triples map; results are merged in document order.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaterializeError {
    #[error("{path}: function {name:?} is not registered")]
    UnknownFunction { name: String, path: String },
}

/// A term that could not be produced for one row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SkippedTerm {
    pub triples_map: String,
    pub row: usize,
    /// Location of the term map inside the triples map, e.g. `predicateObjects[2].object`.
    pub term: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MaterializationReport {
    pub triples: usize,
    pub skipped: Vec<SkippedTerm>,
}

#[derive(Debug, Clone)]
pub struct Materialized {
    pub graph: Graph,
    pub report: MaterializationReport,
}

/// Evaluating a term map against one row failed (the row is skipped for it).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TermError(pub String);

/// Materializes the mapping in parallel mode.
pub fn materialize(
    doc: &MappingDocument,
    data: &Datasets,
    registry: &FunctionRegistry,
) -> Result<Materialized, MaterializeError> {
    materialize_with(doc, data, registry, ExecutionMode::Parallel)
}

pub fn materialize_with(
    doc: &MappingDocument,
    data: &Datasets,
    registry: &FunctionRegistry,
    mode: ExecutionMode,
) -> Result<Materialized, MaterializeError> {
    check_functions(doc, registry)?;
    let run = |(i, tm): (usize, &TriplesMap)| run_triples_map(doc, i, tm, data, registry);
    let parts: Vec<(Vec<Triple>, Vec<SkippedTerm>)> = match mode {
        ExecutionMode::Sequential => doc.triples_maps.iter().enumerate().map(run).collect(),
        ExecutionMode::Parallel => doc.triples_maps.par_iter().enumerate().map(run).collect(),
    };

    let mut graph = Graph::with_prefixes(doc.prefixes.clone());
    let mut skipped = BTreeSet::new();
    for (triples, skips) in parts {
        graph.extend(triples);
        skipped.extend(skips);
    }
    let report = MaterializationReport {
        triples: graph.len(),
        skipped: skipped.into_iter().collect(),
    };
    Ok(Materialized { graph, report })
}

fn check_functions(doc: &MappingDocument, registry: &FunctionRegistry) -> Result<(), MaterializeError> {
    for (i, tm) in doc.triples_maps.iter().enumerate() {
        let mut used = Vec::new();
        tm.subject.term.functions(&format!("triplesMaps[{i}].subject"), &mut used);
        for (j, pom) in tm.predicate_objects.iter().enumerate() {
            if let ObjectMap::Term(o) = &pom.object {
                o.functions(&format!("triplesMaps[{i}].predicateObjects[{j}].object"), &mut used);
            }
        }
        if let Some((name, path)) = used.into_iter().find(|(n, _)| !registry.contains(n)) {
            return Err(MaterializeError::UnknownFunction {
                name: name.to_string(),
                path,
            });
        }
    }
    Ok(())
}

fn run_triples_map(
    doc: &MappingDocument,
    index: usize,
    tm: &TriplesMap,
    data: &Datasets,
    registry: &FunctionRegistry,
) -> (Vec<Triple>, Vec<SkippedTerm>) {
    let mut triples = Vec::new();
    let mut skipped = Vec::new();
    let mut skip = |row: usize, term: String, e: TermError| {
        skipped.push(SkippedTerm {
            triples_map: tm.id.clone(),
            row,
            term,
            reason: e.0,
        })
    };

    // Parent lookups for joins: parent column value -> parent record positions.
    let mut join_indexes: HashMap<(usize, &str), HashMap<&str, Vec<usize>>> = HashMap::new();
    for pom in &tm.predicate_objects {
        if let ObjectMap::Join(j) = &pom.object {
            let parent = &doc.triples_maps[j.parent_index];
            let mut idx: HashMap<&str, Vec<usize>> = HashMap::new();
            for (pos, rec) in data.records(parent.table).iter().enumerate() {
                let mut seen = BTreeSet::new();
                for v in rec.values(&j.parent_column) {
                    if seen.insert(v.as_str()) {
                        idx.entry(v.as_str()).or_default().push(pos);
                    }
                }
            }
            join_indexes.insert((j.parent_index, j.parent_column.as_str()), idx);
        }
    }

    for record in data.records(tm.table) {
        let subjects = match subject_terms(&tm.subject.term, record, registry, index) {
            Ok(s) => s,
            Err(e) => {
                skip(record.row(), "subject".into(), e);
                continue;
            }
        };
        if subjects.is_empty() {
            continue;
        }

        let mut objects: Vec<(&Iri, Vec<Term>)> = Vec::new();
        for (j, pom) in tm.predicate_objects.iter().enumerate() {
            let terms = match &pom.object {
                ObjectMap::Term(o) => match eval_term_map(o, record, registry, index) {
                    Ok(t) => t,
                    Err(e) => {
                        skip(record.row(), format!("predicateObjects[{j}].object"), e);
                        continue;
                    }
                },
                ObjectMap::Join(join) => {
                    let parent = &doc.triples_maps[join.parent_index];
                    let parents = data.records(parent.table);
                    let idx = &join_indexes[&(join.parent_index, join.parent_column.as_str())];
                    let mut out = Vec::new();
                    let mut seen = BTreeSet::new();
                    for v in record.values(&join.child_column) {
                        if !seen.insert(v.as_str()) {
                            continue;
                        }
                        for &pos in idx.get(v.as_str()).into_iter().flatten() {
                            let parent_rec = &parents[pos];
                            match subject_terms(&parent.subject.term, parent_rec, registry, join.parent_index) {
                                Ok(s) => out.extend(s.into_iter().map(Term::from)),
                                Err(e) => skip(record.row(), format!("predicateObjects[{j}].join"), e),
                            }
                        }
                    }
                    out
                }
            };
            objects.push((&pom.predicate, terms));
        }

        let rdf_type = Iri::new(rdf::TYPE).expect("valid");
        for s in &subjects {
            for class in &tm.subject.classes {
                triples.push(Triple::new(s.clone(), rdf_type.clone(), class.clone()));
            }
            for (p, terms) in &objects {
                for o in terms {
                    triples.push(Triple::new(s.clone(), (*p).clone(), o.clone()));
                }
            }
        }
    }
    (triples, skipped)
}

fn subject_terms(
    tm: &TermMap,
    record: &Record,
    registry: &FunctionRegistry,
    tm_index: usize,
) -> Result<Vec<Subject>, TermError> {
    Ok(eval_term_map(tm, record, registry, tm_index)?
        .into_iter()
        .map(|t| Subject::try_from(t).expect("subject maps never produce literals"))
        .collect())
}

/// Deterministic blank node label for a row of a triples map.
pub fn blank_label(tm_index: usize, row: usize) -> String {
    format!("b{tm_index}_{row}")
}

/// Evaluates a term map against one record.
///
/// Returns one term per value (multivalued references fan out), or an empty
/// list when any input is absent. `tm_index` is the position of the owning
/// triples map, used to label blank nodes.
pub fn eval_term_map(
    tm: &TermMap,
    record: &Record,
    registry: &FunctionRegistry,
    tm_index: usize,
) -> Result<Vec<Term>, TermError> {
    if let TermMapKind::Constant(t) = &tm.kind {
        return Ok(vec![t.clone()]);
    }
    let values = eval_values(tm, record, registry)?;
    if values.is_empty() {
        return Ok(vec![]);
    }
    match tm.term_type {
        TermType::Blank => {
            let b = BlankNode::new(blank_label(tm_index, record.row())).expect("label is well-formed");
            Ok(vec![Term::BlankNode(b)])
        }
        TermType::Iri => values
            .into_iter()
            .map(|v| Iri::new(v).map(Term::Iri).map_err(|e| TermError(e.to_string())))
            .collect(),
        TermType::Literal => {
            let udf = match &tm.kind {
                TermMapKind::Function { name, .. } => registry.get(name),
                _ => None,
            };
            values
                .into_iter()
                .map(|v| {
                    let datatype = match (&tm.datatype, udf.and_then(|f| f.datatype_for(&v))) {
                        (Some(d), _) => Some(d.clone()),
                        (None, Some(d)) if tm.language.is_none() => Some(Iri::new(d).expect("valid")),
                        _ => None,
                    };
                    Literal::new(v, datatype, tm.language.as_deref())
                        .map(Term::Literal)
                        .map_err(|e| TermError(e.to_string()))
                })
                .collect()
        }
    }
}

/// The string values a term map yields before term construction.
fn eval_values(tm: &TermMap, record: &Record, registry: &FunctionRegistry) -> Result<Vec<String>, TermError> {
    match &tm.kind {
        TermMapKind::Constant(t) => Ok(vec![t.value().to_string()]),
        TermMapKind::Reference(c) => Ok(record.values(c).to_vec()),
        TermMapKind::Template(t) => Ok(t.expand(record, tm.term_type == TermType::Iri).into_iter().collect()),
        TermMapKind::Function { name, args } => {
            let mut arg_values = Vec::with_capacity(args.len());
            for a in args {
                let v = eval_values(a, record, registry)?;
                if v.is_empty() {
                    return Ok(vec![]);
                }
                arg_values.push(v);
            }
            let f = registry
                .get(name)
                .ok_or_else(|| TermError(format!("function {name:?} is not registered")))?;
            f.call(&arg_values)
                .map_err(|msg| TermError(format!("function {name} failed: {msg}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{builtins, load_mapping, Udf};
    use crate::rdf::vocab::xsd;
    use crate::tabular::{ColumnSpec, TableProfile};

    fn profiles() -> Vec<TableProfile> {
        vec![
            TableProfile::new(
                TableKind::Object,
                vec![
                    ColumnSpec::new("id").required(),
                    ColumnSpec::new("title"),
                    ColumnSpec::new("material").multivalued(),
                    ColumnSpec::new("date"),
                ],
                "id",
            )
            .unwrap(),
            TableProfile::new(
                TableKind::Process,
                vec![ColumnSpec::new("object_id").required(), ColumnSpec::new("stage")],
                "object_id",
            )
            .unwrap(),
        ]
    }

    fn rec(row: usize, pairs: &[(&str, &[&str])]) -> Record {
        let values = pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
            .collect();
        let key = pairs[0].1[0];
        Record::new(row, key, values).unwrap()
    }

    fn object_term_map(json: &str) -> TermMap {
        let doc = load_mapping(
            &format!(
                r#"{{"sources":[{{"id":"o","table":"object"}}],
                    "triplesMaps":[{{"id":"t","source":"o","subject":{{"template":"http://e.o/{{id}}"}},
                    "predicateObjects":[{{"predicate":"http://e.o/p","object":{json}}}]}}]}}"#
            ),
            &profiles(),
        )
        .unwrap();
        match &doc.triples_maps[0].predicate_objects[0].object {
            ObjectMap::Term(t) => t.clone(),
            ObjectMap::Join(_) => unreachable!(),
        }
    }

    #[test]
    fn reference_fans_out() {
        let tm = object_term_map(r#"{"reference":"material"}"#);
        let r = rec(1, &[("id", &["OBJ001"]), ("material", &["wood", "paper"])]);
        let terms = eval_term_map(&tm, &r, &FunctionRegistry::new(), 0).unwrap();
        assert_eq!(
            terms,
            vec![Term::Literal(Literal::simple("wood")), Term::Literal(Literal::simple("paper"))]
        );
    }

    #[test]
    fn identity_function() {
        let tm = object_term_map(r#"{"function":{"name":"identity","args":[{"reference":"title"}]}}"#);
        let r = rec(1, &[("id", &["OBJ001"]), ("title", &["Globe"])]);
        let terms = eval_term_map(&tm, &r, &FunctionRegistry::with_builtins(), 0).unwrap();
        assert_eq!(terms, vec![Term::Literal(Literal::simple("Globe"))]);
    }

    #[test]
    fn to_iso_date_function_types_literal() {
        let tm = object_term_map(r#"{"function":{"name":"to_iso_date","args":[{"reference":"date"}]}}"#);
        let r = rec(1, &[("id", &["OBJ001"]), ("date", &["05/03/2023"])]);
        let terms = eval_term_map(&tm, &r, &FunctionRegistry::with_builtins(), 0).unwrap();
        let expected = Literal::typed("2023-03-05", Iri::new(xsd::DATE).unwrap()).unwrap();
        assert_eq!(terms, vec![Term::Literal(expected)]);
    }

    #[test]
    fn null_inputs_produce_nothing() {
        let r = rec(1, &[("id", &["OBJ001"])]);
        let reg = FunctionRegistry::with_builtins();
        for json in [
            r#"{"reference":"title"}"#,
            r#"{"template":"http://e.o/t/{title}"}"#,
            r#"{"function":{"name":"lowercase","args":[{"reference":"title"}]}}"#,
        ] {
            assert!(eval_term_map(&object_term_map(json), &r, &reg, 0).unwrap().is_empty(), "{json}");
        }
    }

    #[test]
    fn failing_function_is_row_error() {
        let tm = object_term_map(r#"{"function":{"name":"to_iso_date","args":[{"reference":"date"}]}}"#);
        let r = rec(1, &[("id", &["OBJ001"]), ("date", &["someday"])]);
        assert!(eval_term_map(&tm, &r, &FunctionRegistry::with_builtins(), 0).is_err());
    }

    const DOC: &str = r#"{
        "prefixes":{"ex":"http://e.o/"},
        "sources":[{"id":"o","table":"object"},{"id":"p","table":"process"}],
        "triplesMaps":[
          {"id":"obj","source":"o","subject":{"template":"ex:object/{id}","classes":["ex:Object"]},
           "predicateObjects":[
             {"predicate":"ex:title","object":{"reference":"title"}},
             {"predicate":"ex:material","object":{"reference":"material"}},
             {"predicate":"ex:date","object":{"function":{"name":"to_iso_date","args":[{"reference":"date"}]}}}]},
          {"id":"proc","source":"p","subject":{"template":"ex:process/{object_id}/{stage}"},
           "predicateObjects":[{"predicate":"ex:digitizes","join":{"parentTriplesMap":"obj","child":"object_id","parent":"id"}}]}]}"#;

    fn data() -> Datasets {
        Datasets::new()
            .with(
                TableKind::Object,
                vec![
                    rec(1, &[("id", &["A"]), ("title", &["Globe"]), ("material", &["wood"]), ("date", &["1580"])]),
                    rec(2, &[("id", &["B"]), ("title", &["Print"]), ("date", &["later"])]),
                ],
            )
            .with(
                TableKind::Process,
                vec![
                    rec(1, &[("object_id", &["A"]), ("stage", &["RAW"])]),
                    rec(2, &[("object_id", &["A"]), ("stage", &["DCHO"])]),
                    rec(3, &[("object_id", &["Z"]), ("stage", &["RAW"])]),
                ],
            )
    }

    #[test]
    fn materializes_with_join_and_report() {
        let doc = load_mapping(DOC, &profiles()).unwrap();
        let out = materialize(&doc, &data(), &FunctionRegistry::with_builtins()).unwrap();
        // A: type, title, material, date = 4; B: type, title = 2 (bad date skipped);
        // processes for A join twice; Z has no parent.
        assert_eq!(out.graph.len(), 8);
        assert_eq!(out.report.triples, 8);
        assert_eq!(out.report.skipped.len(), 1);
        let skip = &out.report.skipped[0];
        assert_eq!((skip.triples_map.as_str(), skip.row), ("obj", 2));
        assert_eq!(skip.term, "predicateObjects[2].object");
        let digitizes = Triple::new(
            Iri::new("http://e.o/process/A/DCHO").unwrap(),
            Iri::new("http://e.o/digitizes").unwrap(),
            Iri::new("http://e.o/object/A").unwrap(),
        );
        assert!(out.graph.contains(&digitizes));
    }

    #[test]
    fn unregistered_function_fails_before_rows() {
        let doc = load_mapping(DOC, &profiles()).unwrap();
        let err = materialize(&doc, &Datasets::new(), &FunctionRegistry::new()).unwrap_err();
        assert_eq!(
            err,
            MaterializeError::UnknownFunction {
                name: "to_iso_date".into(),
                path: "triplesMaps[0].predicateObjects[2].object.function".into()
            }
        );
    }

    #[test]
    fn sequential_equals_parallel() {
        let doc = load_mapping(DOC, &profiles()).unwrap();
        let reg = FunctionRegistry::with_builtins();
        let seq = materialize_with(&doc, &data(), &reg, ExecutionMode::Sequential).unwrap();
        let par = materialize_with(&doc, &data(), &reg, ExecutionMode::Parallel).unwrap();
        assert_eq!(seq.graph, par.graph);
        assert_eq!(seq.report, par.report);
    }

    #[test]
    fn blank_subject_labels() {
        let doc = load_mapping(
            r#"{"sources":[{"id":"o","table":"object"}],
                "triplesMaps":[
                  {"id":"first","source":"o","subject":{"template":"http://e.o/{id}"}},
                  {"id":"second","source":"o","subject":{"reference":"id","termType":"blank"},
                   "predicateObjects":[{"predicate":"http://e.o/title","object":{"reference":"title"}}]}]}"#,
            &profiles(),
        )
        .unwrap();
        let out = materialize(&doc, &data(), &FunctionRegistry::new()).unwrap();
        let labels: BTreeSet<String> = out
            .graph
            .iter()
            .filter_map(|t| match &t.subject {
                Subject::BlankNode(b) => Some(b.label().to_string()),
                _ => None,
            })
            .collect();
        assert_eq!(labels, BTreeSet::from(["b1_1".to_string(), "b1_2".to_string()]));
    }

    #[test]
    fn custom_function_extends_registry() {
        let mut reg = FunctionRegistry::with_builtins();
        reg.register("shout", Udf::new(|a| Ok(a.concat().iter().map(|v| v.to_uppercase()).collect())))
            .unwrap();
        assert!(reg.register("concat", builtins::concat()).is_err());
        let tm = object_term_map(r#"{"function":{"name":"shout","args":[{"reference":"title"}]}}"#);
        let r = rec(1, &[("id", &["A"]), ("title", &["globe"])]);
        assert_eq!(eval_term_map(&tm, &r, &reg, 0).unwrap(), vec![Term::Literal(Literal::simple("GLOBE"))]);
    }
}
