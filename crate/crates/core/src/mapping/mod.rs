//! Declarative row-to-triple mapping: an RML subset expressed as JSON, with
//! joins between tables and a registry of user-defined functions.

mod document;
mod functions;
mod materialize;
mod template;

pub use self::document::{
    load_mapping, JoinCondition, LogicalSource, MappingDocument, MappingError, MappingErrorKind,
    ObjectMap, PredicateObjectMap, SubjectMap, TermMap, TermMapKind, TermType, TriplesMap,
};
pub use self::functions::{
    builtins, register_function, DatatypeFn, DuplicateFunction, FunctionRegistry, Udf, UdfFn,
};
pub use self::materialize::{
    blank_label, eval_term_map, materialize, materialize_with, Datasets, ExecutionMode,
    MaterializationReport, MaterializeError, Materialized, SkippedTerm, TermError,
};
pub use self::template::{expand_template, percent_encode, Template, TemplateError};
