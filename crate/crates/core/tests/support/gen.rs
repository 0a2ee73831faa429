use heritage_kg::rdf::{BlankNode, Graph, Iri, Literal, Subject, Term, Triple};
use proptest::prelude::*;

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Lexical forms heavy on characters that need escaping.
pub fn arb_lexical() -> impl Strategy<Value = String> {
    let nasty = prop::sample::select(vec![
        "\"", "\\", "\n", "\r", "\t", "\u{8}", "\u{c}", "\u{0}", "\u{1f}", "\u{7f}", "é", "日本", "🏛", "\u{feff}",
        "\u{10ffff}", "'", "<>", "_:x", "@en", "^^", " ", "#", "%41",
    ]);
    prop::collection::vec(prop_oneof![2 => "[a-zA-Z0-9 ]{1,4}", 1 => nasty.prop_map(str::to_string)], 0..8)
        .prop_map(|parts| parts.concat())
}

pub fn arb_iri() -> impl Strategy<Value = Iri> {
    (
        prop::sample::select(vec!["http", "https", "urn", "tag+x"]),
        "[a-zA-Z0-9éß/#?=&%:._~-]{0,12}",
    )
        .prop_map(|(scheme, rest)| Iri::new(format!("{scheme}://example.org/{rest}")).expect("generated IRI is valid"))
}

pub fn arb_blank() -> impl Strategy<Value = BlankNode> {
    "[A-Za-z0-9_]{1,6}".prop_map(|l| BlankNode::new(l).expect("generated label is valid"))
}

pub fn arb_literal() -> impl Strategy<Value = Literal> {
    let datatype = prop::sample::select(vec!["string", "integer", "date", "boolean", "gYear"])
        .prop_map(|local| Iri::new(format!("{XSD}{local}")).unwrap());
    let lang = prop::sample::select(vec!["en", "it", "en-GB", "de-CH-1996", "x-private"]);
    prop_oneof![
        arb_lexical().prop_map(Literal::simple),
        (arb_lexical(), datatype).prop_map(|(l, d)| Literal::typed(l, d).unwrap()),
        (arb_lexical(), arb_iri()).prop_map(|(l, d)| Literal::typed(l, d).unwrap()),
        (arb_lexical(), lang).prop_map(|(l, t)| Literal::new(l, None, Some(t)).unwrap()),
    ]
}

pub fn arb_subject() -> impl Strategy<Value = Subject> {
    prop_oneof![3 => arb_iri().prop_map(Subject::Iri), 1 => arb_blank().prop_map(Subject::BlankNode)]
}

pub fn arb_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        2 => arb_iri().prop_map(Term::Iri),
        1 => arb_blank().prop_map(Term::BlankNode),
        3 => arb_literal().prop_map(Term::Literal),
    ]
}

pub fn arb_triple() -> impl Strategy<Value = Triple> {
    (arb_subject(), arb_iri(), arb_term()).prop_map(|(s, p, o)| Triple::new(s, p, o))
}

/// Up to `max` triples, duplicates allowed.
pub fn arb_triples(max: usize) -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec(arb_triple(), 0..=max)
}

pub fn graph_of(triples: impl IntoIterator<Item = Triple>) -> Graph {
    let mut g = Graph::new();
    for t in triples {
        g.insert(t);
    }
    g
}
