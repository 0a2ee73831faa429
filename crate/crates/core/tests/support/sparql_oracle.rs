//! A brute-force reference evaluator for the SELECT subset.
//!
//! Cases are generated together with their query text; the oracle never
//! looks at the engine's AST. Basic graph patterns are solved by trying every
//! assignment of graph terms to the pattern's variables (with pruning of
//! assignments that already violate a fully bound pattern).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use heritage_kg::rdf::{BlankNode, Graph, Iri, Literal, Subject, Term, Triple};
use heritage_kg::sparql::{execute_query, ResultSet};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

const EX: &str = "http://example.org/";
const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
const VARS: [&str; 5] = ["x", "y", "z", "w", "p"];

pub type Row = BTreeMap<String, Term>;

fn iri(local: &str) -> Iri {
    Iri::new(format!("{EX}{local}")).unwrap()
}

fn int(n: i64) -> Term {
    Term::Literal(Literal::typed(n.to_string(), Iri::new(XSD_INTEGER).unwrap()).unwrap())
}

pub fn subjects() -> Vec<Subject> {
    let mut out: Vec<Subject> = ["a", "b", "c", "d", "e"].iter().map(|l| Subject::Iri(iri(l))).collect();
    out.push(Subject::BlankNode(BlankNode::new("n1").unwrap()));
    out
}

pub fn predicates() -> Vec<Iri> {
    ["p", "q", "r"].iter().map(|l| iri(l)).collect()
}

pub fn objects() -> Vec<Term> {
    let mut out: Vec<Term> = subjects().into_iter().map(Term::from).collect();
    out.extend([int(1), int(2), int(10)]);
    out.push(Term::Literal(Literal::simple("x")));
    out.push(Term::Literal(Literal::simple("abc")));
    out.push(Term::Literal(Literal::simple("1")));
    out.push(Term::Literal(Literal::new("b", None, Some("en")).unwrap()));
    out
}

/// Constants usable in query text (no blank nodes: they would be variables).
fn query_constants() -> Vec<Term> {
    objects().into_iter().filter(|t| !matches!(t, Term::BlankNode(_))).collect()
}

fn sparql_term(t: &Term) -> String {
    match t {
        Term::Iri(i) => format!("<{}>", i.as_str()),
        Term::BlankNode(b) => format!("_:{}", b.label()),
        Term::Literal(l) => {
            if let Some(lang) = l.language() {
                format!("\"{}\"@{lang}", l.lexical())
            } else if l.is_simple() {
                format!("\"{}\"", l.lexical())
            } else {
                format!("\"{}\"^^<{}>", l.lexical(), l.datatype().as_str())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    Var(&'static str),
    Const(Term),
}

impl Slot {
    fn text(&self) -> String {
        match self {
            Slot::Var(v) => format!("?{v}"),
            Slot::Const(t) => sparql_term(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern(pub [Slot; 3]);

impl Pattern {
    fn text(&self) -> String {
        format!("{} {} {}", self.0[0].text(), self.0[1].text(), self.0[2].text())
    }

    fn vars(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.0.iter().filter_map(|s| match s {
            Slot::Var(v) => Some(*v),
            Slot::Const(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    EqConst(&'static str, Term),
    NeVars(&'static str, &'static str),
    Bound(&'static str),
    LtInt(&'static str, i64),
    /// `regex(str(?v), pattern)` for a pattern from [`REGEXES`].
    Regex(&'static str, usize),
    Not(Box<Filter>),
    And(Box<Filter>, Box<Filter>),
    Or(Box<Filter>, Box<Filter>),
}

/// Regex patterns and their plain-string meaning.
const REGEXES: [(&str, Match); 4] = [
    ("^a", Match::Prefix("a")),
    ("b", Match::Contains("b")),
    ("c$", Match::Suffix("c")),
    ("example", Match::Contains("example")),
];

#[derive(Debug, Clone, Copy)]
enum Match {
    Prefix(&'static str),
    Contains(&'static str),
    Suffix(&'static str),
}

impl Filter {
    fn text(&self) -> String {
        match self {
            Filter::EqConst(v, t) => format!("?{v} = {}", sparql_term(t)),
            Filter::NeVars(a, b) => format!("?{a} != ?{b}"),
            Filter::Bound(v) => format!("bound(?{v})"),
            Filter::LtInt(v, n) => format!("?{v} < {n}"),
            Filter::Regex(v, i) => format!("regex(str(?{v}), \"{}\")", REGEXES[*i].0),
            Filter::Not(f) => format!("!({})", f.text()),
            Filter::And(a, b) => format!("({}) && ({})", a.text(), b.text()),
            Filter::Or(a, b) => format!("({}) || ({})", a.text(), b.text()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub graph: Vec<Triple>,
    pub patterns: Vec<Pattern>,
    pub optional: Option<(Pattern, Option<Filter>)>,
    pub filter: Option<Filter>,
    /// `None` is `SELECT *`.
    pub projection: Option<Vec<&'static str>>,
    pub distinct: bool,
    /// One descending flag per projected variable, in projection order.
    pub order: Option<Vec<bool>>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl Case {
    /// Variables in first-appearance order.
    pub fn pattern_vars(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let opt = self.optional.iter().map(|(p, _)| p);
        for v in self.patterns.iter().chain(opt).flat_map(Pattern::vars) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn projected(&self) -> Vec<&'static str> {
        self.projection.clone().unwrap_or_else(|| self.pattern_vars())
    }

    pub fn query(&self) -> String {
        let mut q = String::from("SELECT ");
        if self.distinct {
            q.push_str("DISTINCT ");
        }
        match &self.projection {
            None => q.push('*'),
            Some(vs) => q.push_str(&vs.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join(" ")),
        }
        q.push_str(" WHERE { ");
        q.push_str(&self.patterns.iter().map(Pattern::text).collect::<Vec<_>>().join(" . "));
        if let Some((p, f)) = &self.optional {
            q.push_str(&format!(" OPTIONAL {{ {}", p.text()));
            if let Some(f) = f {
                q.push_str(&format!(" FILTER ({})", f.text()));
            }
            q.push_str(" }");
        }
        if let Some(f) = &self.filter {
            q.push_str(&format!(" FILTER ({})", f.text()));
        }
        q.push_str(" }");
        if let Some(order) = &self.order {
            q.push_str(" ORDER BY");
            for (v, desc) in self.projected().iter().zip(order) {
                if *desc {
                    q.push_str(&format!(" DESC(?{v})"));
                } else {
                    q.push_str(&format!(" ?{v}"));
                }
            }
        }
        if let Some(n) = self.limit {
            q.push_str(&format!(" LIMIT {n}"));
        }
        if let Some(n) = self.offset {
            q.push_str(&format!(" OFFSET {n}"));
        }
        q
    }
}

fn arb_slot(vars: &'static [&'static str], consts: Vec<Term>) -> impl Strategy<Value = Slot> {
    prop_oneof![
        5 => prop::sample::select(vars).prop_map(Slot::Var),
        1 => prop::sample::select(consts).prop_map(Slot::Const),
    ]
}

fn arb_pattern(vars: &'static [&'static str]) -> impl Strategy<Value = Pattern> {
    let subj: Vec<Term> = subjects()
        .into_iter()
        .filter(|s| matches!(s, Subject::Iri(_)))
        .map(Term::from)
        .collect();
    let preds: Vec<Term> = predicates().into_iter().map(Term::Iri).collect();
    (
        arb_slot(vars, subj),
        prop_oneof![1 => Just(Slot::Var("p")), 3 => prop::sample::select(preds).prop_map(Slot::Const)],
        arb_slot(vars, query_constants()),
    )
        .prop_map(|(s, p, o)| Pattern([s, p, o]))
}

fn arb_filter(vars: &'static [&'static str]) -> impl Strategy<Value = Filter> {
    let var = || prop::sample::select(vars);
    let leaf = prop_oneof![
        (var(), prop::sample::select(query_constants())).prop_map(|(v, t)| Filter::EqConst(v, t)),
        (var(), var()).prop_map(|(a, b)| Filter::NeVars(a, b)),
        var().prop_map(Filter::Bound),
        (var(), 0i64..12).prop_map(|(v, n)| Filter::LtInt(v, n)),
        (var(), 0..REGEXES.len()).prop_map(|(v, i)| Filter::Regex(v, i)),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| Filter::Not(Box::new(f))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Filter::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Filter::Or(Box::new(a), Box::new(b))),
        ]
    })
}

fn arb_graph() -> impl Strategy<Value = Vec<Triple>> {
    let triple = (
        prop::sample::select(subjects()),
        prop::sample::select(predicates()),
        prop::sample::select(objects()),
    )
        .prop_map(|(s, p, o)| Triple::new(s, p, o));
    prop_oneof![1 => 0usize..10, 4 => 10usize..=50].prop_flat_map(move |n| prop::collection::vec(triple.clone(), n))
}

const MAIN_VARS: &[&str] = &["x", "y", "z"];
const ALL_VARS: &[&str] = &["x", "y", "z", "w"];

/// Graphs of at most 50 triples; at most three triple patterns in total,
/// with optional OPTIONAL, FILTER, DISTINCT, ORDER BY, LIMIT and OFFSET.
pub fn arb_case() -> impl Strategy<Value = Case> {
    let shape = (1usize..=3).prop_flat_map(|n| {
        let optional = if n < 3 {
            prop::option::of((arb_pattern(ALL_VARS), prop::option::weighted(0.3, arb_filter(&VARS)))).boxed()
        } else {
            Just(None).boxed()
        };
        (prop::collection::vec(arb_pattern(MAIN_VARS), n), optional)
    });
    (
        arb_graph(),
        shape,
        prop::option::weighted(0.4, arb_filter(&VARS)),
        any::<bool>(),
        any::<bool>(),
        prop::collection::vec(any::<bool>(), VARS.len()),
        prop::option::weighted(0.5, any::<bool>()),
        prop::option::weighted(0.3, 0usize..6),
        prop::option::weighted(0.2, 0usize..4),
        any::<u64>(),
    )
        .prop_map(|(graph, (patterns, optional), filter, star, distinct, desc, order, limit, offset, pick)| {
            let mut case = Case {
                graph,
                patterns,
                optional,
                filter,
                projection: None,
                distinct,
                order: None,
                limit,
                offset,
            };
            let vars = case.pattern_vars();
            if vars.is_empty() {
                // `SELECT *` over a ground pattern projects nothing; keep it.
                case.projection = None;
            } else if !star {
                let chosen: Vec<&'static str> =
                    vars.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).map(|(_, v)| *v).collect();
                case.projection = Some(if chosen.is_empty() { vec![vars[0]] } else { chosen });
            }
            if order.is_some() {
                let n = case.projected().len();
                case.order = (n > 0).then(|| desc[..n].to_vec());
            }
            case
        })
}

/// Draws `n` cases from a fixed-seed runner.
pub fn sample_cases(n: usize) -> Vec<Case> {
    let mut runner = TestRunner::deterministic();
    let strategy = arb_case();
    (0..n).map(|_| strategy.new_tree(&mut runner).expect("strategy").current()).collect()
}

// ---------------------------------------------------------------------------
// Reference semantics

type Assignment = BTreeMap<&'static str, Term>;

fn domain(graph: &[Triple]) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for t in graph {
        for term in [Term::from(t.subject.clone()), Term::Iri(t.predicate.clone()), t.object.clone()] {
            if !out.contains(&term) {
                out.push(term);
            }
        }
    }
    out
}

/// The graph with every term replaced by its position in the domain.
struct Indexed {
    domain: Vec<Term>,
    triples: HashSet<[usize; 3]>,
}

impl Indexed {
    fn new(graph: &[Triple]) -> Self {
        let domain = domain(graph);
        let id = |t: &Term| domain.iter().position(|d| d == t).expect("term in domain");
        let triples = graph
            .iter()
            .map(|t| [id(&Term::from(t.subject.clone())), id(&Term::Iri(t.predicate.clone())), id(&t.object)])
            .collect();
        Indexed { domain, triples }
    }

    fn id(&self, t: &Term) -> Option<usize> {
        self.domain.iter().position(|d| d == t)
    }
}

/// A pattern slot after binding: a known term id, a constant absent from
/// the graph (never matches), or the n-th variable being enumerated.
enum Bound {
    Id(usize),
    Absent,
    Free(usize),
}

/// Every extension of `base` over `free`, drawing terms from the graph's
/// domain, that satisfies all `patterns`. Exhaustive; each pattern is
/// checked as soon as its last variable is assigned, which prunes dead
/// branches, and variables are ordered most-constrained first.
fn solve(base: &Assignment, free: &[&'static str], patterns: &[&Pattern], graph: &Indexed) -> Vec<Assignment> {
    let mut order: Vec<&'static str> = Vec::new();
    let open = |p: &Pattern, order: &[&'static str]| -> Vec<&'static str> {
        p.vars().filter(|v| free.contains(v) && !order.contains(v)).collect()
    };
    while let Some(next) = patterns.iter().map(|p| open(p, &order)).filter(|o| !o.is_empty()).min_by_key(Vec::len) {
        for v in next {
            if !order.contains(&v) {
                order.push(v);
            }
        }
    }

    let resolve = |slot: &Slot| match slot {
        Slot::Var(v) => match order.iter().position(|o| o == v) {
            Some(i) => Bound::Free(i),
            None => base.get(v).and_then(|t| graph.id(t)).map_or(Bound::Absent, Bound::Id),
        },
        Slot::Const(t) => graph.id(t).map_or(Bound::Absent, Bound::Id),
    };
    let compiled: Vec<[Bound; 3]> = patterns.iter().map(|p| [resolve(&p.0[0]), resolve(&p.0[1]), resolve(&p.0[2])]).collect();
    let last = |p: &[Bound; 3]| {
        p.iter()
            .filter_map(|s| match s {
                Bound::Free(i) => Some(*i),
                _ => None,
            })
            .max()
    };
    let holds = |p: &[Bound; 3], ids: &[usize]| {
        let mut key = [0; 3];
        for (k, s) in key.iter_mut().zip(p) {
            *k = match s {
                Bound::Id(id) => *id,
                Bound::Free(i) => ids[*i],
                Bound::Absent => return false,
            };
        }
        graph.triples.contains(&key)
    };
    if compiled.iter().any(|p| last(p).is_none() && !holds(p, &[])) {
        return Vec::new();
    }

    fn walk(ids: &mut Vec<usize>, n: usize, domain: usize, check: &dyn Fn(&[usize]) -> bool, out: &mut Vec<Vec<usize>>) {
        if ids.len() == n {
            out.push(ids.clone());
            return;
        }
        for t in 0..domain {
            ids.push(t);
            if check(ids) {
                walk(ids, n, domain, check, out);
            }
            ids.pop();
        }
    }
    let check = |ids: &[usize]| {
        compiled
            .iter()
            .filter(|p| last(p) == Some(ids.len() - 1))
            .all(|p| holds(p, ids))
    };
    let mut found = Vec::new();
    walk(&mut Vec::new(), order.len(), graph.domain.len(), &check, &mut found);
    found
        .into_iter()
        .map(|ids| {
            let mut a = base.clone();
            for (v, id) in order.iter().zip(ids) {
                a.insert(v, graph.domain[id].clone());
            }
            a
        })
        .collect()
}

/// Three-valued filter result: `None` is an evaluation error.
fn eval_filter(f: &Filter, a: &Assignment) -> Option<bool> {
    match f {
        Filter::Bound(v) => Some(a.contains_key(v)),
        Filter::EqConst(v, c) => Some(same_value(a.get(v)?, c)),
        Filter::NeVars(x, y) => Some(!same_value(a.get(x)?, a.get(y)?)),
        Filter::LtInt(v, n) => {
            let t = a.get(v)?;
            match (integer(t), t) {
                (Some(i), _) => Some(i < *n),
                (None, Term::Literal(l)) => Some(l.lexical() < n.to_string().as_str()),
                _ => None,
            }
        }
        Filter::Regex(v, i) => {
            let s = match a.get(v)? {
                Term::Iri(i) => i.as_str().to_string(),
                Term::Literal(l) => l.lexical().to_string(),
                Term::BlankNode(_) => return None,
            };
            Some(match REGEXES[*i].1 {
                Match::Prefix(p) => s.starts_with(p),
                Match::Contains(p) => s.contains(p),
                Match::Suffix(p) => s.ends_with(p),
            })
        }
        Filter::Not(f) => eval_filter(f, a).map(|b| !b),
        Filter::And(x, y) => match (eval_filter(x, a), eval_filter(y, a)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Filter::Or(x, y) => match (eval_filter(x, a), eval_filter(y, a)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
    }
}

fn integer(t: &Term) -> Option<i64> {
    let l = t.as_literal()?;
    (l.datatype().as_str() == XSD_INTEGER).then(|| l.lexical().parse().ok())?
}

fn same_value(a: &Term, b: &Term) -> bool {
    match (integer(a), integer(b)) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

fn passes(f: &Option<Filter>, a: &Assignment) -> bool {
    f.as_ref().is_none_or(|f| eval_filter(f, a) == Some(true))
}

/// Documented solution order: unbound, blank nodes, IRIs, then literals with
/// numbers first.
fn cmp_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn rank(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(Term::BlankNode(_)) => 1,
            Some(Term::Iri(_)) => 2,
            Some(t) if integer(t).is_some() => 3,
            Some(_) => 4,
        }
    }
    rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
        (Some(x), Some(y)) => match (integer(x), integer(y)) {
            (Some(i), Some(j)) => i.cmp(&j),
            _ => {
                let key = |t: &Term| match t {
                    Term::Literal(l) => (l.lexical().to_string(), l.datatype().as_str().to_string(), l.language().map(str::to_string)),
                    other => (other.value().to_string(), String::new(), None),
                };
                key(x).cmp(&key(y))
            }
        },
        _ => Ordering::Equal,
    })
}

/// What the engine must return for a case.
pub enum Expected {
    /// Equal as multisets.
    Bag(Vec<Row>),
    /// Equal as ordered lists.
    List(Vec<Row>),
    /// LIMIT without ORDER BY: any sub-multiset of this size.
    Window { of: Vec<Row>, len: usize },
}

pub fn oracle(case: &Case) -> Expected {
    let graph = Indexed::new(&case.graph);
    let mut main_vars: Vec<&'static str> = Vec::new();
    for v in case.patterns.iter().flat_map(Pattern::vars) {
        if !main_vars.contains(&v) {
            main_vars.push(v);
        }
    }
    let main: Vec<&Pattern> = case.patterns.iter().collect();
    let mut solutions = solve(&Assignment::new(), &main_vars, &main, &graph);

    if let Some((p, f)) = &case.optional {
        let mut free: Vec<&'static str> = Vec::new();
        for v in p.vars() {
            if !main_vars.contains(&v) && !free.contains(&v) {
                free.push(v);
            }
        }
        solutions = solutions
            .into_iter()
            .flat_map(|mu| {
                let ext: Vec<Assignment> =
                    solve(&mu, &free, &[p], &graph).into_iter().filter(|a| passes(f, a)).collect();
                if ext.is_empty() {
                    vec![mu]
                } else {
                    ext
                }
            })
            .collect();
    }
    solutions.retain(|a| passes(&case.filter, a));

    let projected = case.projected();
    if let Some(desc) = &case.order {
        solutions.sort_by(|a, b| {
            projected
                .iter()
                .zip(desc)
                .map(|(v, d)| {
                    let o = cmp_terms(a.get(v), b.get(v));
                    if *d {
                        o.reverse()
                    } else {
                        o
                    }
                })
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
    }
    let mut rows: Vec<Row> = solutions
        .iter()
        .map(|a| {
            projected
                .iter()
                .filter_map(|v| Some((v.to_string(), a.get(v)?.clone())))
                .collect()
        })
        .collect();
    if case.distinct {
        let mut seen: Vec<Row> = Vec::new();
        rows.retain(|r| {
            if seen.contains(r) {
                false
            } else {
                seen.push(r.clone());
                true
            }
        });
    }
    let offset = case.offset.unwrap_or(0);
    let window = |rows: &[Row]| -> Vec<Row> {
        rows.iter().skip(offset).take(case.limit.unwrap_or(usize::MAX)).cloned().collect()
    };
    match (&case.order, case.limit.is_some() || case.offset.is_some()) {
        (Some(_), _) => Expected::List(window(&rows)),
        (None, false) => Expected::Bag(rows),
        (None, true) => {
            let len = window(&rows).len();
            Expected::Window { of: rows, len }
        }
    }
}

pub fn rows_of(rs: &ResultSet) -> Vec<Row> {
    rs.solutions()
        .iter()
        .map(|s| s.iter().map(|(v, t)| (v.name().to_string(), t.clone())).collect())
        .collect()
}

fn sorted(mut rows: Vec<Row>) -> Vec<Row> {
    rows.sort();
    rows
}

fn is_sub_multiset(small: &[Row], big: &[Row]) -> bool {
    let mut pool = big.to_vec();
    small.iter().all(|r| match pool.iter().position(|x| x == r) {
        Some(i) => {
            pool.swap_remove(i);
            true
        }
        None => false,
    })
}

/// Runs one case through the engine; `Err` describes the mismatch.
pub fn check_case(case: &Case) -> Result<(), String> {
    let graph = {
        let mut g = Graph::new();
        for t in &case.graph {
            g.insert(t.clone());
        }
        g
    };
    let query = case.query();
    let rs = execute_query(&graph, &query).map_err(|e| format!("{query}: engine error {e}"))?;
    let expected_vars: Vec<String> = case.projected().iter().map(|v| v.to_string()).collect();
    let got_vars: Vec<String> = rs.variables().iter().map(|v| v.name().to_string()).collect();
    if got_vars != expected_vars {
        return Err(format!("{query}: variables {got_vars:?}, expected {expected_vars:?}"));
    }
    let got = rows_of(&rs);
    let ok = match oracle(case) {
        Expected::Bag(rows) => sorted(got.clone()) == sorted(rows),
        Expected::List(rows) => got == rows,
        Expected::Window { of, len } => got.len() == len && is_sub_multiset(&got, &of),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{query}: engine returned {} rows that differ from the oracle", got.len()))
    }
}
