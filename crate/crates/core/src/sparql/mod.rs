//! A SELECT-only SPARQL subset evaluated in memory over a [`Graph`].
//!
//! Supported: basic graph patterns, OPTIONAL (nested up to three levels),
//! FILTER with comparisons, `&&`, `||`, `!`, `bound`, `regex`, `str`,
//! `lang`; DISTINCT, ORDER BY, LIMIT, OFFSET, `COUNT` with GROUP BY.
//! Anything else is rejected with [`QueryError::Unsupported`].
//!
//! [`Graph`]: crate::rdf::Graph

mod ast;
mod eval;
mod lexer;
mod parser;
mod results;

use thiserror::Error;

pub use self::ast::{
    CompareOp, Expression, GroupElement, GroupPattern, OrderCondition, Projection, Query,
    SelectItem, TermPattern, TriplePattern, Variable,
};
pub use self::eval::{evaluate, execute_query};
pub use self::parser::{parse_query, MAX_OPTIONAL_DEPTH};
pub use self::results::{
    parse_results_json, serialize_results_json, ResultSet, ResultsError, SolutionMapping,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported feature: {feature}")]
    Unsupported { feature: String },
    #[error("invalid query: {message}")]
    Invalid { message: String },
}
