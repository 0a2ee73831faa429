use std::collections::{BTreeMap, HashMap};

use super::term::{Iri, Subject, Term, Triple};

/// Prefix name to namespace IRI. Names are unique by construction.
pub type PrefixMap = BTreeMap<String, Iri>;

/// An in-memory set of triples with per-position lookup indexes.
///
/// Insertion order is kept for iteration; equality is set equality and
/// ignores prefixes.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: Vec<Triple>,
    position: HashMap<Triple, usize>,
    by_subject: HashMap<Subject, Vec<usize>>,
    by_predicate: HashMap<Iri, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
    prefixes: PrefixMap,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_prefixes(prefixes: PrefixMap) -> Self {
        Graph {
            prefixes,
            ..Self::default()
        }
    }

    /// Adds a triple; returns `true` iff it was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.position.contains_key(&triple) {
            return false;
        }
        let idx = self.triples.len();
        self.by_subject.entry(triple.subject.clone()).or_default().push(idx);
        self.by_predicate.entry(triple.predicate.clone()).or_default().push(idx);
        self.by_object.entry(triple.object.clone()).or_default().push(idx);
        self.position.insert(triple.clone(), idx);
        self.triples.push(triple);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.position.contains_key(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Triple> {
        self.triples.iter()
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn set_prefix(&mut self, name: impl Into<String>, namespace: Iri) {
        self.prefixes.insert(name.into(), namespace);
    }

    /// Triples matching the bound positions. Candidates come from the
    /// shortest index among the bound positions and are then filtered.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&'a Subject>,
        predicate: Option<&'a Iri>,
        object: Option<&'a Term>,
    ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        const EMPTY: &[usize] = &[];
        let mut candidates: Option<&[usize]> = None;
        let mut narrow = |list: Option<&'a Vec<usize>>| {
            let list = list.map(Vec::as_slice).unwrap_or(EMPTY);
            if candidates.is_none_or(|c| list.len() < c.len()) {
                candidates = Some(list);
            }
        };
        if let Some(s) = subject {
            narrow(self.by_subject.get(s));
        }
        if let Some(p) = predicate {
            narrow(self.by_predicate.get(p));
        }
        if let Some(o) = object {
            narrow(self.by_object.get(o));
        }
        let keep = move |t: &&Triple| {
            subject.is_none_or(|s| &t.subject == s)
                && predicate.is_none_or(|p| &t.predicate == p)
                && object.is_none_or(|o| &t.object == o)
        };
        match candidates {
            Some(idx) => Box::new(idx.iter().map(|&i| &self.triples[i]).filter(keep)),
            None => Box::new(self.triples.iter()),
        }
    }

    /// Adds every triple of `other` and any prefixes not already declared.
    pub fn extend_from(&mut self, other: Graph) {
        for (name, ns) in other.prefixes {
            self.prefixes.entry(name).or_insert(ns);
        }
        for t in other.triples {
            self.insert(t);
        }
    }
}

/// Adds a triple to the graph; `true` iff newly added.
pub fn graph_insert(graph: &mut Graph, triple: Triple) -> bool {
    graph.insert(triple)
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.triples.iter().all(|t| other.contains(t))
    }
}

impl Eq for Graph {}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        for t in iter {
            g.insert(t);
        }
        g
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::slice::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}
