//! Turtle output. There is deliberately no Turtle parser; N-Triples is the
//! round-trip format.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::graph::{Graph, PrefixMap};
use super::ntriples::quote_literal;
use super::term::{Iri, Subject, Term};
use super::vocab::rdf;

/// Writes the graph as Turtle, abbreviating IRIs with the graph's prefixes.
///
/// Subjects are emitted in sorted order with their predicate-object lists
/// grouped, so the output is deterministic.
pub fn serialize_turtle(graph: &Graph) -> String {
    let prefixes = graph.prefixes();
    let mut out = String::new();
    for (name, ns) in prefixes {
        let _ = writeln!(out, "@prefix {name}: <{}> .", ns.as_str());
    }

    let mut grouped: BTreeMap<&Subject, BTreeMap<&Iri, Vec<&Term>>> = BTreeMap::new();
    for t in graph {
        grouped
            .entry(&t.subject)
            .or_default()
            .entry(&t.predicate)
            .or_default()
            .push(&t.object);
    }
    if !grouped.is_empty() && !prefixes.is_empty() {
        out.push('\n');
    }

    for (subject, predicates) in grouped {
        let subject = match subject {
            Subject::Iri(i) => iri_ref(i, prefixes),
            Subject::BlankNode(b) => b.to_string(),
        };
        out.push_str(&subject);
        for (i, (predicate, mut objects)) in predicates.into_iter().enumerate() {
            objects.sort();
            out.push_str(if i == 0 { " " } else { " ;\n    " });
            if predicate.as_str() == rdf::TYPE {
                out.push('a');
            } else {
                out.push_str(&iri_ref(predicate, prefixes));
            }
            for (j, object) in objects.into_iter().enumerate() {
                out.push_str(if j == 0 { " " } else { ", " });
                out.push_str(&term(object, prefixes));
            }
        }
        out.push_str(" .\n");
    }
    out
}

fn term(t: &Term, prefixes: &PrefixMap) -> String {
    match t {
        Term::Iri(i) => iri_ref(i, prefixes),
        Term::BlankNode(b) => b.to_string(),
        Term::Literal(l) => {
            let mut s = quote_literal(l.lexical());
            if let Some(lang) = l.language() {
                s.push('@');
                s.push_str(lang);
            } else if !l.is_simple() {
                s.push_str("^^");
                s.push_str(&iri_ref(l.datatype(), prefixes));
            }
            s
        }
    }
}

/// A prefixed name when some namespace matches and the remainder is a safe
/// local name, otherwise `<iri>`. The longest matching namespace wins.
fn iri_ref(iri: &Iri, prefixes: &PrefixMap) -> String {
    let best = prefixes
        .iter()
        .filter_map(|(name, ns)| {
            let local = iri.as_str().strip_prefix(ns.as_str())?;
            is_safe_local(local).then_some((ns.as_str().len(), name, local))
        })
        .max_by_key(|(len, _, _)| *len);
    match best {
        Some((_, name, local)) => format!("{name}:{local}"),
        None => format!("<{}>", iri.as_str()),
    }
}

/// Conservative subset of Turtle's `PN_LOCAL`.
fn is_safe_local(local: &str) -> bool {
    local.is_empty()
        || (local.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
            && !local.starts_with('-'))
}
