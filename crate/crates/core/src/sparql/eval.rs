use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use regex::Regex;

use super::ast::*;
use super::results::{ResultSet, SolutionMapping};
use super::{parse_query, QueryError};
use crate::rdf::vocab::xsd;
use crate::rdf::{Graph, Iri, Literal, Subject, Term};

type Binding = BTreeMap<Variable, Term>;

/// Parses and evaluates `text` against `graph`.
pub fn execute_query(graph: &Graph, text: &str) -> Result<ResultSet, QueryError> {
    let query = parse_query(text)?;
    Ok(evaluate(&query, graph))
}

/// Evaluates a parsed query.
///
/// Solutions flow through: pattern matching with filters, grouping, ORDER BY
/// (stable), projection, DISTINCT, then OFFSET and LIMIT.
pub fn evaluate(query: &Query, graph: &Graph) -> ResultSet {
    let ctx = Context::default();
    let mut rows = eval_group(&query.pattern, graph, &ctx);
    if query.is_grouped() {
        rows = aggregate(query, rows);
    }
    if !query.order_by.is_empty() {
        let keyed: Vec<(Vec<Option<Term>>, Binding)> = rows
            .into_iter()
            .map(|b| {
                let key = query.order_by.iter().map(|c| ctx.eval(&c.expression, &b).ok()).collect();
                (key, b)
            })
            .collect();
        let mut keyed = keyed;
        keyed.sort_by(|(a, _), (b, _)| {
            for (i, cond) in query.order_by.iter().enumerate() {
                let ord = order_terms(a[i].as_ref(), b[i].as_ref());
                let ord = if cond.descending { ord.reverse() } else { ord };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            Ordering::Equal
        });
        rows = keyed.into_iter().map(|(_, b)| b).collect();
    }
    let variables = query.result_variables();
    let mut solutions: Vec<SolutionMapping> = rows
        .into_iter()
        .map(|b| {
            b.into_iter()
                .filter(|(v, _)| variables.contains(v))
                .collect::<SolutionMapping>()
        })
        .collect();
    if query.distinct {
        let mut seen = HashSet::new();
        solutions.retain(|s| seen.insert(s.clone()));
    }
    let offset = query.offset.unwrap_or(0);
    let solutions = solutions
        .into_iter()
        .skip(offset)
        .take(query.limit.unwrap_or(usize::MAX))
        .collect();
    ResultSet::new(variables, solutions)
}

fn eval_group(group: &GroupPattern, graph: &Graph, ctx: &Context) -> Vec<Binding> {
    let mut rows = vec![Binding::new()];
    for element in &group.elements {
        match element {
            GroupElement::Triple(tp) => {
                rows = rows.iter().flat_map(|b| match_pattern(tp, b, graph)).collect();
            }
            GroupElement::Optional(inner) => {
                let right = eval_group_unfiltered(inner, graph, ctx);
                let conditions: Vec<&Expression> = inner.filters().collect();
                rows = left_join(rows, &right, &conditions, ctx);
            }
            GroupElement::Filter(_) => {}
        }
    }
    let filters: Vec<&Expression> = group.filters().collect();
    rows.retain(|b| filters.iter().all(|f| ctx.test(f, b)));
    rows
}

/// The body of an OPTIONAL: its own filters become the left-join condition.
fn eval_group_unfiltered(group: &GroupPattern, graph: &Graph, ctx: &Context) -> Vec<Binding> {
    let stripped = GroupPattern {
        elements: group
            .elements
            .iter()
            .filter(|e| !matches!(e, GroupElement::Filter(_)))
            .cloned()
            .collect(),
    };
    eval_group(&stripped, graph, ctx)
}

fn left_join(left: Vec<Binding>, right: &[Binding], conditions: &[&Expression], ctx: &Context) -> Vec<Binding> {
    let mut out = Vec::new();
    for l in left {
        let mut extended = false;
        for r in right {
            if !compatible(&l, r) {
                continue;
            }
            let mut merged = l.clone();
            merged.extend(r.iter().map(|(k, v)| (k.clone(), v.clone())));
            if conditions.iter().all(|c| ctx.test(c, &merged)) {
                out.push(merged);
                extended = true;
            }
        }
        if !extended {
            out.push(l);
        }
    }
    out
}

fn compatible(a: &Binding, b: &Binding) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().all(|(k, v)| large.get(k).is_none_or(|w| w == v))
}

fn resolve<'a>(p: &'a TermPattern, b: &'a Binding) -> Option<&'a Term> {
    match p {
        TermPattern::Term(t) => Some(t),
        TermPattern::Variable(v) => b.get(v),
    }
}

fn match_pattern(tp: &TriplePattern, b: &Binding, graph: &Graph) -> Vec<Binding> {
    let subject = match resolve(&tp.subject, b) {
        Some(t) => match Subject::try_from(t.clone()) {
            Ok(s) => Some(s),
            Err(_) => return Vec::new(),
        },
        None => None,
    };
    let predicate = match resolve(&tp.predicate, b) {
        Some(Term::Iri(i)) => Some(i.clone()),
        Some(_) => return Vec::new(),
        None => None,
    };
    let object = resolve(&tp.object, b).cloned();
    let mut out = Vec::new();
    for t in graph.matching(subject.as_ref(), predicate.as_ref(), object.as_ref()) {
        let mut nb = b.clone();
        let ok = bind(&mut nb, &tp.subject, Term::from(t.subject.clone()))
            && bind(&mut nb, &tp.predicate, Term::Iri(t.predicate.clone()))
            && bind(&mut nb, &tp.object, t.object.clone());
        if ok {
            out.push(nb);
        }
    }
    out
}

fn bind(b: &mut Binding, p: &TermPattern, value: Term) -> bool {
    match p {
        TermPattern::Term(_) => true,
        TermPattern::Variable(v) => match b.get(v) {
            Some(existing) => *existing == value,
            None => {
                b.insert(v.clone(), value);
                true
            }
        },
    }
}

fn aggregate(query: &Query, rows: Vec<Binding>) -> Vec<Binding> {
    let keys: &[Variable] = query.group_by.as_deref().unwrap_or(&[]);
    let mut order: Vec<Vec<Option<Term>>> = Vec::new();
    let mut groups: HashMap<Vec<Option<Term>>, Vec<Binding>> = HashMap::new();
    for row in rows {
        let key: Vec<Option<Term>> = keys.iter().map(|k| row.get(k).cloned()).collect();
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(row);
    }
    if query.group_by.is_none() && order.is_empty() {
        order.push(Vec::new());
        groups.insert(Vec::new(), Vec::new());
    }
    let items: &[SelectItem] = match &query.projection {
        Projection::Items(items) => items,
        Projection::All => &[],
    };
    order
        .into_iter()
        .map(|key| {
            let members = &groups[&key];
            let mut out = Binding::new();
            for (k, v) in keys.iter().zip(key) {
                if let Some(v) = v {
                    out.insert(k.clone(), v);
                }
            }
            for item in items {
                if let SelectItem::Count { counted, alias } = item {
                    let n = match counted {
                        None => members.len(),
                        Some(v) => members.iter().filter(|m| m.contains_key(v)).count(),
                    };
                    out.insert(alias.clone(), integer(n));
                }
            }
            out
        })
        .collect()
}

fn integer(n: usize) -> Term {
    Term::Literal(Literal::typed(n.to_string(), Iri::new(xsd::INTEGER).expect("valid")).expect("valid"))
}

fn boolean(b: bool) -> Term {
    Term::Literal(Literal::typed(b.to_string(), Iri::new(xsd::BOOLEAN).expect("valid")).expect("valid"))
}

/// Numeric value of a literal with a numeric datatype and valid lexical form.
pub(crate) fn numeric_value(t: &Term) -> Option<f64> {
    let l = t.as_literal()?;
    if !xsd::NUMERIC.contains(&l.datatype().as_str()) {
        return None;
    }
    let lex = l.lexical().trim();
    match l.datatype().as_str() {
        xsd::DOUBLE | xsd::FLOAT => match lex {
            "INF" | "+INF" => Some(f64::INFINITY),
            "-INF" => Some(f64::NEG_INFINITY),
            "NaN" => Some(f64::NAN),
            _ if lex.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) => lex.parse().ok(),
            _ => None,
        },
        xsd::DECIMAL => {
            if lex.contains(['e', 'E']) || !lex.bytes().any(|b| b.is_ascii_digit()) {
                return None;
            }
            lex.parse().ok()
        }
        _ => {
            let digits = lex.strip_prefix(['+', '-']).unwrap_or(lex);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            lex.parse().ok()
        }
    }
}

/// Total order used by ORDER BY: unbound, blank nodes, IRIs, then literals.
/// Numeric literals sort before other literals, by value.
pub(crate) fn order_terms(a: Option<&Term>, b: Option<&Term>) -> Ordering {
    fn rank(t: Option<&Term>) -> u8 {
        match t {
            None => 0,
            Some(Term::BlankNode(_)) => 1,
            Some(Term::Iri(_)) => 2,
            Some(Term::Literal(_)) => 3,
        }
    }
    match (a, b) {
        (Some(Term::BlankNode(x)), Some(Term::BlankNode(y))) => x.label().cmp(y.label()),
        (Some(Term::Iri(x)), Some(Term::Iri(y))) => x.as_str().cmp(y.as_str()),
        (Some(x @ Term::Literal(lx)), Some(y @ Term::Literal(ly))) => {
            match (numeric_value(x), numeric_value(y)) {
                (Some(nx), Some(ny)) => nx.total_cmp(&ny).then_with(|| literal_key(lx).cmp(&literal_key(ly))),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => literal_key(lx).cmp(&literal_key(ly)),
            }
        }
        _ => rank(a).cmp(&rank(b)),
    }
}

fn literal_key(l: &Literal) -> (&str, &str, Option<&str>) {
    (l.lexical(), l.datatype().as_str(), l.language())
}

/// An expression error; the enclosing filter then rejects the solution.
#[derive(Debug)]
struct ExprError;

type ExprResult = Result<Term, ExprError>;

#[derive(Default)]
struct Context {
    regexes: RefCell<HashMap<(String, String), Option<Regex>>>,
}

impl Context {
    fn test(&self, e: &Expression, b: &Binding) -> bool {
        matches!(self.eval(e, b).and_then(|t| ebv(&t)), Ok(true))
    }

    fn eval(&self, e: &Expression, b: &Binding) -> ExprResult {
        match e {
            Expression::Variable(v) => b.get(v).cloned().ok_or(ExprError),
            Expression::Term(t) => Ok(t.clone()),
            Expression::Bound(v) => Ok(boolean(b.contains_key(v))),
            Expression::Not(x) => Ok(boolean(!ebv(&self.eval(x, b)?)?)),
            Expression::And(x, y) => {
                let l = self.eval(x, b).and_then(|t| ebv(&t));
                let r = self.eval(y, b).and_then(|t| ebv(&t));
                match (l, r) {
                    (Ok(false), _) | (_, Ok(false)) => Ok(boolean(false)),
                    (Ok(true), Ok(true)) => Ok(boolean(true)),
                    _ => Err(ExprError),
                }
            }
            Expression::Or(x, y) => {
                let l = self.eval(x, b).and_then(|t| ebv(&t));
                let r = self.eval(y, b).and_then(|t| ebv(&t));
                match (l, r) {
                    (Ok(true), _) | (_, Ok(true)) => Ok(boolean(true)),
                    (Ok(false), Ok(false)) => Ok(boolean(false)),
                    _ => Err(ExprError),
                }
            }
            Expression::Compare(op, x, y) => {
                let l = self.eval(x, b)?;
                let r = self.eval(y, b)?;
                compare(*op, &l, &r).map(boolean)
            }
            Expression::Str(x) => match self.eval(x, b)? {
                Term::Iri(i) => Ok(Term::Literal(Literal::simple(i.as_str()))),
                Term::Literal(l) => Ok(Term::Literal(Literal::simple(l.lexical()))),
                Term::BlankNode(_) => Err(ExprError),
            },
            Expression::Lang(x) => match self.eval(x, b)? {
                Term::Literal(l) => Ok(Term::Literal(Literal::simple(l.language().unwrap_or("")))),
                _ => Err(ExprError),
            },
            Expression::Regex(text, pattern, flags) => {
                let text = string_value(&self.eval(text, b)?)?;
                let pattern = simple_string(&self.eval(pattern, b)?)?;
                let flags = match flags {
                    Some(f) => simple_string(&self.eval(f, b)?)?,
                    None => String::new(),
                };
                let mut cache = self.regexes.borrow_mut();
                let re = cache
                    .entry((pattern.clone(), flags.clone()))
                    .or_insert_with(|| compile_regex(&pattern, &flags));
                match re {
                    Some(re) => Ok(boolean(re.is_match(&text))),
                    None => Err(ExprError),
                }
            }
        }
    }
}

fn compile_regex(pattern: &str, flags: &str) -> Option<Regex> {
    let mut builder = regex::RegexBuilder::new(pattern);
    for f in flags.chars() {
        match f {
            'i' => builder.case_insensitive(true),
            's' => builder.dot_matches_new_line(true),
            'm' => builder.multi_line(true),
            'x' => builder.ignore_whitespace(true),
            _ => return None,
        };
    }
    builder.build().ok()
}

fn string_value(t: &Term) -> Result<String, ExprError> {
    match t {
        Term::Literal(l) if l.is_simple() || l.language().is_some() => Ok(l.lexical().to_string()),
        _ => Err(ExprError),
    }
}

fn simple_string(t: &Term) -> Result<String, ExprError> {
    match t {
        Term::Literal(l) if l.is_simple() => Ok(l.lexical().to_string()),
        _ => Err(ExprError),
    }
}

/// Effective boolean value.
fn ebv(t: &Term) -> Result<bool, ExprError> {
    let Term::Literal(l) = t else {
        return Err(ExprError);
    };
    if l.datatype().as_str() == xsd::BOOLEAN {
        return match l.lexical() {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            _ => Err(ExprError),
        };
    }
    if xsd::NUMERIC.contains(&l.datatype().as_str()) {
        let n = numeric_value(t).ok_or(ExprError)?;
        return Ok(n != 0.0 && !n.is_nan());
    }
    if l.is_simple() {
        return Ok(!l.lexical().is_empty());
    }
    Err(ExprError)
}

fn compare(op: CompareOp, l: &Term, r: &Term) -> Result<bool, ExprError> {
    if let (Some(a), Some(b)) = (numeric_value(l), numeric_value(r)) {
        return Ok(match op {
            CompareOp::Eq => a == b,
            CompareOp::Ne => a != b,
            CompareOp::Lt => a < b,
            CompareOp::Gt => a > b,
            CompareOp::Le => a <= b,
            CompareOp::Ge => a >= b,
        });
    }
    match op {
        CompareOp::Eq => Ok(l == r),
        CompareOp::Ne => Ok(l != r),
        _ => {
            let (Term::Literal(a), Term::Literal(b)) = (l, r) else {
                return Err(ExprError);
            };
            let ord = a.lexical().cmp(b.lexical());
            Ok(match op {
                CompareOp::Lt => ord.is_lt(),
                CompareOp::Gt => ord.is_gt(),
                CompareOp::Le => ord.is_le(),
                CompareOp::Ge => ord.is_ge(),
                CompareOp::Eq | CompareOp::Ne => unreachable!(),
            })
        }
    }
}
