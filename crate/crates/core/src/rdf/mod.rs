//! RDF terms, triples, graphs, and their text serializations.

mod graph;
mod ntriples;
mod term;
mod turtle;
pub mod vocab;

pub use self::graph::{graph_insert, Graph, PrefixMap};
pub use self::ntriples::{parse_ntriples, serialize_ntriples, NTriplesError};
pub use self::term::{
    make_iri, make_literal, BlankNode, BlankNodeError, Iri, IriError, Literal, LiteralError,
    Subject, Term, Triple,
};
pub use self::turtle::serialize_turtle;
