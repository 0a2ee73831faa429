use std::path::Path;

use heritage_kg::mapping::{load_mapping, materialize, Datasets, FunctionRegistry, MaterializationReport};
use heritage_kg::rdf::{serialize_ntriples, serialize_turtle, Graph};
use heritage_kg::tabular::{ingest, parse_csv, ValidationReport};
use serde::Serialize;

use crate::config::{require_file, PipelineConfig, TableSource};
use crate::CliError;

/// Everything the report file records about one build.
#[derive(Debug, Clone, Serialize)]
pub struct BuildReport {
    pub ok: bool,
    pub object_table: ValidationReport,
    pub process_table: ValidationReport,
    pub materialization: MaterializationReport,
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub graph: Graph,
    pub report: BuildReport,
}

fn read_table(source: &TableSource, separator: &str) -> Result<(Vec<heritage_kg::tabular::Record>, ValidationReport), CliError> {
    let bytes = std::fs::read(&source.path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", source.path.display())))?;
    let table = parse_csv(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", source.path.display())))?;
    Ok(ingest(&table, &source.profile, separator))
}

/// Parses, validates, normalizes and materializes, without writing anything.
pub fn run_pipeline(config: &PipelineConfig) -> Result<BuildOutcome, CliError> {
    require_file(&config.object.path, "object table")?;
    require_file(&config.process.path, "process table")?;
    require_file(&config.mapping, "mapping")?;
    let (objects, object_report) = read_table(&config.object, &config.separator)?;
    let (processes, process_report) = read_table(&config.process, &config.separator)?;
    tracing::info!(
        stage = "ingest",
        objects = objects.len(),
        processes = processes.len(),
        issues = object_report.issues.len() + process_report.issues.len()
    );
    let text = std::fs::read_to_string(&config.mapping)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", config.mapping.display())))?;
    let profiles = [config.object.profile.clone(), config.process.profile.clone()];
    let doc = load_mapping(&text, &profiles)
        .map_err(|e| CliError::Input(format!("{}: {e}", config.mapping.display())))?;
    let data = Datasets::new()
        .with(heritage_kg::tabular::TableKind::Object, objects)
        .with(heritage_kg::tabular::TableKind::Process, processes);
    let result = materialize(&doc, &data, &FunctionRegistry::with_builtins())
        .map_err(|e| CliError::Input(format!("{}: {e}", config.mapping.display())))?;
    tracing::info!(stage = "materialize", triples = result.report.triples, skipped = result.report.skipped.len());
    let ok = !object_report.has_errors() && !process_report.has_errors();
    Ok(BuildOutcome {
        graph: result.graph,
        report: BuildReport {
            ok,
            object_table: object_report,
            process_table: process_report,
            materialization: result.report,
        },
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Runs the pipeline and writes its artifacts.
///
/// The report is always written. The graph files are written only when no
/// error-level issue was found, in which case `Err(Validation)` is returned.
pub fn cmd_build(config: &PipelineConfig) -> Result<BuildOutcome, CliError> {
    let outcome = run_pipeline(config)?;
    let report = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    write(&config.output.report, &(report + "\n"))?;
    if !outcome.report.ok {
        let errors = [&outcome.report.object_table, &outcome.report.process_table]
            .iter()
            .flat_map(|r| r.issues.iter())
            .filter(|i| i.kind.severity() == heritage_kg::tabular::Severity::Error)
            .map(|i| format!("row {} column {:?}: {}", i.row, i.column, i.message))
            .collect::<Vec<_>>();
        return Err(CliError::Validation(errors.join("\n")));
    }
    write(&config.output.ntriples, &serialize_ntriples(&outcome.graph))?;
    write(&config.output.turtle, &serialize_turtle(&outcome.graph))?;
    Ok(outcome)
}
