//! Cultural-heritage catalog tables to an RDF knowledge graph, a SPARQL
//! SELECT engine over it, and config-driven data stories built from query
//! results.
//!
//! The pipeline has four stages, each in its own module:
//!
//! * [`tabular`] reads and validates the object and process CSV tables;
//! * [`mapping`] turns normalized rows into triples from a JSON mapping
//!   document (an RML subset with joins and user-defined functions);
//! * [`sparql`] parses and evaluates SELECT queries over an [`rdf::Graph`];
//! * [`story`] runs a story configuration's queries for one object and
//!   renders the result as HTML or JSON.
//!
//! The guide in `book/` walks through each stage; its Rust snippets are
//! compiled as doc-tests of this crate.

pub mod mapping;
pub mod rdf;
pub mod sparql;
pub mod story;
pub mod tabular;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/ingest.md")]
    mod ingest {}
    #[doc = include_str!("../../../book/src/rdf.md")]
    mod rdf {}
    #[doc = include_str!("../../../book/src/mapping.md")]
    mod mapping {}
    #[doc = include_str!("../../../book/src/sparql.md")]
    mod sparql {}
    #[doc = include_str!("../../../book/src/stories.md")]
    mod stories {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
