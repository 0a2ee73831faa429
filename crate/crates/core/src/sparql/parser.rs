use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::QueryError;
use crate::rdf::vocab::{rdf, xsd};
use crate::rdf::{Iri, Literal, PrefixMap, Term};

/// Deepest OPTIONAL nesting accepted.
pub const MAX_OPTIONAL_DEPTH: usize = 3;

/// Parses a SPARQL SELECT query in the supported subset.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        i: 0,
        end: text.len(),
        prefixes: PrefixMap::new(),
    };
    let query = p.query()?;
    validate(&query)?;
    Ok(query)
}

struct Parser {
    tokens: Vec<Token>,
    i: usize,
    end: usize,
    prefixes: PrefixMap,
}

const UNSUPPORTED_KEYWORDS: &[(&str, &str)] = &[
    ("CONSTRUCT", "CONSTRUCT queries"),
    ("ASK", "ASK queries"),
    ("DESCRIBE", "DESCRIBE queries"),
    ("INSERT", "updates"),
    ("DELETE", "updates"),
    ("LOAD", "updates"),
    ("CLEAR", "updates"),
    ("DROP", "updates"),
    ("CREATE", "updates"),
    ("WITH", "updates"),
    ("BASE", "BASE declarations"),
    ("UNION", "UNION"),
    ("MINUS", "MINUS"),
    ("BIND", "BIND"),
    ("VALUES", "VALUES"),
    ("SERVICE", "SERVICE"),
    ("GRAPH", "GRAPH"),
    ("FROM", "FROM datasets"),
    ("HAVING", "HAVING"),
    ("REDUCED", "REDUCED"),
];

const AGGREGATES: &[&str] = &["SUM", "AVG", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT"];

fn unsupported(feature: impl Into<String>) -> QueryError {
    QueryError::Unsupported {
        feature: feature.into(),
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.i).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.i).map_or(self.end, |t| t.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.i).map(|t| t.tok.clone());
        self.i += 1;
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of query".into(),
            Some(t) => format!("{t:?}"),
        }
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_word(&mut self, kw: &str) -> bool {
        if self.is_word(kw) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.eat_word(kw) {
            Ok(())
        } else {
            self.error(format!("expected {kw}, found {}", self.describe()))
        }
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QueryError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            self.error(format!("expected '{c}', found {}", self.describe()))
        }
    }

    /// Rejects out-of-subset keywords with `Unsupported` rather than a
    /// generic syntax error.
    fn check_unsupported_word(&self) -> Result<(), QueryError> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if let Some((_, feature)) = UNSUPPORTED_KEYWORDS.iter().find(|(k, _)| *k == upper) {
                return Err(unsupported(*feature));
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        loop {
            self.check_unsupported_word()?;
            if !self.eat_word("PREFIX") {
                break;
            }
            let Some(Tok::PName(prefix, local)) = self.next() else {
                self.i -= 1;
                return self.error("expected prefix name after PREFIX");
            };
            if !local.is_empty() {
                self.i -= 1;
                return self.error("prefix declaration must end with ':'");
            }
            let iri = self.iri_ref()?;
            self.prefixes.insert(prefix, iri);
        }
        self.check_unsupported_word()?;
        self.expect_word("SELECT")?;
        let distinct = self.eat_word("DISTINCT");
        self.check_unsupported_word()?;
        let projection = self.projection()?;
        self.check_unsupported_word()?;
        self.eat_word("WHERE");
        let pattern = self.group(0)?;
        let mut group_by = None;
        let mut order_by = Vec::new();
        let mut limit = None;
        let mut offset = None;
        if self.eat_word("GROUP") {
            self.expect_word("BY")?;
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(Variable::new(v.clone()));
                self.i += 1;
            }
            if vars.is_empty() {
                if self.is_punct('(') || matches!(self.peek(), Some(Tok::Word(_))) {
                    return Err(unsupported("GROUP BY expressions"));
                }
                return self.error("expected variable after GROUP BY");
            }
            if self.is_punct('(') {
                return Err(unsupported("GROUP BY expressions"));
            }
            group_by = Some(vars);
        }
        self.check_unsupported_word()?;
        if self.eat_word("ORDER") {
            self.expect_word("BY")?;
            loop {
                let cond = if self.is_word("ASC") || self.is_word("DESC") {
                    let descending = self.is_word("DESC");
                    self.i += 1;
                    self.expect_punct('(')?;
                    let e = self.expression()?;
                    self.expect_punct(')')?;
                    OrderCondition { expression: e, descending }
                } else if let Some(Tok::Var(v)) = self.peek() {
                    let e = Expression::Variable(Variable::new(v.clone()));
                    self.i += 1;
                    OrderCondition { expression: e, descending: false }
                } else if self.is_punct('(') {
                    self.i += 1;
                    let e = self.expression()?;
                    self.expect_punct(')')?;
                    OrderCondition { expression: e, descending: false }
                } else if matches!(self.peek(), Some(Tok::Word(w)) if is_builtin(w)) {
                    OrderCondition { expression: self.primary()?, descending: false }
                } else {
                    break;
                };
                order_by.push(cond);
            }
            if order_by.is_empty() {
                return self.error("expected an ORDER BY condition");
            }
        }
        for _ in 0..2 {
            if limit.is_none() && self.eat_word("LIMIT") {
                limit = Some(self.count_value("LIMIT")?);
            } else if offset.is_none() && self.eat_word("OFFSET") {
                offset = Some(self.count_value("OFFSET")?);
            }
        }
        self.check_unsupported_word()?;
        if self.peek().is_some() {
            return self.error(format!("unexpected {} after query", self.describe()));
        }
        Ok(Query {
            prefixes: std::mem::take(&mut self.prefixes),
            distinct,
            projection,
            pattern,
            group_by,
            order_by,
            limit,
            offset,
        })
    }

    fn count_value(&mut self, what: &str) -> Result<usize, QueryError> {
        match self.peek() {
            Some(Tok::Integer(n)) if !n.starts_with(['+', '-']) => {
                let n = n.parse().map_err(|_| QueryError::Syntax {
                    position: self.pos(),
                    message: format!("{what} value out of range"),
                })?;
                self.i += 1;
                Ok(n)
            }
            _ => self.error(format!("expected a non-negative integer after {what}")),
        }
    }

    fn projection(&mut self) -> Result<Projection, QueryError> {
        if self.eat_punct('*') {
            return Ok(Projection::All);
        }
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Var(v)) => {
                    items.push(SelectItem::Variable(Variable::new(v.clone())));
                    self.i += 1;
                }
                Some(Tok::Punct('(')) => {
                    self.i += 1;
                    items.push(self.aggregate()?);
                }
                _ => break,
            }
        }
        if items.is_empty() {
            return self.error(format!("expected projection, found {}", self.describe()));
        }
        Ok(Projection::Items(items))
    }

    fn aggregate(&mut self) -> Result<SelectItem, QueryError> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if AGGREGATES.contains(&upper.as_str()) {
                return Err(unsupported(format!("{upper} aggregate")));
            }
        }
        if !self.eat_word("COUNT") {
            return Err(unsupported("projection expressions other than COUNT"));
        }
        self.expect_punct('(')?;
        if self.is_word("DISTINCT") {
            return Err(unsupported("COUNT(DISTINCT ...)"));
        }
        let counted = if self.eat_punct('*') {
            None
        } else if let Some(Tok::Var(v)) = self.peek() {
            let v = Variable::new(v.clone());
            self.i += 1;
            Some(v)
        } else {
            return Err(unsupported("COUNT over an expression"));
        };
        self.expect_punct(')')?;
        self.expect_word("AS")?;
        let Some(Tok::Var(alias)) = self.peek().cloned() else {
            return self.error("expected variable after AS");
        };
        self.i += 1;
        self.expect_punct(')')?;
        Ok(SelectItem::Count {
            counted,
            alias: Variable::new(alias),
        })
    }

    fn group(&mut self, depth: usize) -> Result<GroupPattern, QueryError> {
        if depth > MAX_OPTIONAL_DEPTH {
            return Err(unsupported(format!("OPTIONAL nested deeper than {MAX_OPTIONAL_DEPTH}")));
        }
        self.expect_punct('{')?;
        let mut elements = Vec::new();
        loop {
            self.check_unsupported_word()?;
            if self.eat_punct('}') {
                break;
            }
            if self.eat_punct('.') {
                continue;
            }
            if self.is_punct('{') {
                return Err(unsupported("nested group patterns"));
            }
            if self.is_word("SELECT") {
                return Err(unsupported("subqueries"));
            }
            if self.eat_word("OPTIONAL") {
                elements.push(GroupElement::Optional(self.group(depth + 1)?));
            } else if self.eat_word("FILTER") {
                elements.push(GroupElement::Filter(self.constraint()?));
            } else if self.peek().is_none() {
                return self.error("unterminated group pattern");
            } else {
                self.triples_same_subject(&mut elements)?;
                if !self.is_punct('}') {
                    self.check_unsupported_word()?;
                    if !self.is_word("OPTIONAL") && !self.is_word("FILTER") {
                        self.expect_punct('.')?;
                    }
                }
            }
        }
        Ok(GroupPattern { elements })
    }

    fn constraint(&mut self) -> Result<Expression, QueryError> {
        if self.eat_punct('(') {
            let e = self.expression()?;
            self.expect_punct(')')?;
            Ok(e)
        } else if matches!(self.peek(), Some(Tok::Word(_))) {
            self.primary()
        } else {
            self.error("expected '(' or function call after FILTER")
        }
    }

    fn triples_same_subject(&mut self, out: &mut Vec<GroupElement>) -> Result<(), QueryError> {
        let subject = self.node()?;
        loop {
            let predicate = self.verb()?;
            loop {
                let object = self.node()?;
                out.push(GroupElement::Triple(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                }));
                if !self.eat_punct(',') {
                    break;
                }
            }
            if !self.eat_punct(';') {
                break;
            }
            while self.eat_punct(';') {}
            if self.is_punct('.') || self.is_punct('}') {
                break;
            }
        }
        Ok(())
    }

    fn verb(&mut self) -> Result<TermPattern, QueryError> {
        let p = if self.eat_word("a") {
            TermPattern::Term(Term::Iri(Iri::new(rdf::TYPE).expect("valid")))
        } else {
            match self.peek() {
                Some(Tok::Var(v)) => {
                    let v = Variable::new(v.clone());
                    self.i += 1;
                    TermPattern::Variable(v)
                }
                Some(Tok::IriRef(_) | Tok::PName(..)) => TermPattern::Term(Term::Iri(self.iri()?)),
                Some(Tok::Punct('^' | '!' | '(')) => return Err(unsupported("property paths")),
                _ => return self.error(format!("expected predicate, found {}", self.describe())),
            }
        };
        if matches!(self.peek(), Some(Tok::Punct('/' | '|' | '*' | '+' | '?'))) {
            return Err(unsupported("property paths"));
        }
        Ok(p)
    }

    fn node(&mut self) -> Result<TermPattern, QueryError> {
        match self.peek() {
            Some(Tok::Var(v)) => {
                let v = Variable::new(v.clone());
                self.i += 1;
                Ok(TermPattern::Variable(v))
            }
            Some(Tok::BlankLabel(l)) => {
                let v = Variable::new(format!("_:{l}"));
                self.i += 1;
                Ok(TermPattern::Variable(v))
            }
            Some(Tok::Punct('[')) => Err(unsupported("anonymous blank nodes")),
            Some(Tok::Punct('(')) => Err(unsupported("RDF collections")),
            _ => Ok(TermPattern::Term(self.constant()?)),
        }
    }

    fn iri_ref(&mut self) -> Result<Iri, QueryError> {
        match self.peek() {
            Some(Tok::IriRef(s)) => {
                let s = s.clone();
                let iri = self.checked_iri(&s)?;
                self.i += 1;
                Ok(iri)
            }
            _ => self.error(format!("expected IRI, found {}", self.describe())),
        }
    }

    fn checked_iri(&self, s: &str) -> Result<Iri, QueryError> {
        Iri::new(s).map_err(|e| match e {
            crate::rdf::IriError::Relative { .. } => unsupported("relative IRIs"),
            e => QueryError::Syntax {
                position: self.pos(),
                message: e.to_string(),
            },
        })
    }

    fn iri(&mut self) -> Result<Iri, QueryError> {
        match self.peek() {
            Some(Tok::PName(prefix, local)) => {
                let Some(ns) = self.prefixes.get(prefix) else {
                    return self.error(format!("undeclared prefix {prefix:?}"));
                };
                let full = format!("{}{local}", ns.as_str());
                let iri = self.checked_iri(&full)?;
                self.i += 1;
                Ok(iri)
            }
            _ => self.iri_ref(),
        }
    }

    /// An IRI, literal, number, or boolean.
    fn constant(&mut self) -> Result<Term, QueryError> {
        let pos = self.pos();
        let lit = |lex: &str, dt: &str| Term::Literal(Literal::typed(lex, Iri::new(dt).expect("valid")).expect("valid"));
        match self.peek().cloned() {
            Some(Tok::IriRef(_) | Tok::PName(..)) => Ok(Term::Iri(self.iri()?)),
            Some(Tok::Str(s)) => {
                self.i += 1;
                let result = match self.peek().cloned() {
                    Some(Tok::LangTag(tag)) => {
                        self.i += 1;
                        Literal::new(s, None, Some(&tag))
                    }
                    Some(Tok::DoubleCaret) => {
                        self.i += 1;
                        let dt = self.iri()?;
                        Literal::new(s, Some(dt), None)
                    }
                    _ => Ok(Literal::simple(s)),
                };
                result.map(Term::Literal).map_err(|e| QueryError::Syntax {
                    position: pos,
                    message: e.to_string(),
                })
            }
            Some(Tok::Integer(n)) => {
                self.i += 1;
                Ok(lit(&n, xsd::INTEGER))
            }
            Some(Tok::Decimal(n)) => {
                self.i += 1;
                Ok(lit(&n, xsd::DECIMAL))
            }
            Some(Tok::Double(n)) => {
                self.i += 1;
                Ok(lit(&n, xsd::DOUBLE))
            }
            Some(Tok::Word(w)) if w == "true" || w == "false" => {
                self.i += 1;
                Ok(lit(&w, xsd::BOOLEAN))
            }
            _ => self.error(format!("expected term, found {}", self.describe())),
        }
    }

    fn expression(&mut self) -> Result<Expression, QueryError> {
        let mut e = self.and_expr()?;
        while self.peek() == Some(&Tok::OrOr) {
            self.i += 1;
            e = Expression::Or(Box::new(e), Box::new(self.and_expr()?));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expression, QueryError> {
        let mut e = self.relational()?;
        while self.peek() == Some(&Tok::AndAnd) {
            self.i += 1;
            e = Expression::And(Box::new(e), Box::new(self.relational()?));
        }
        Ok(e)
    }

    fn relational(&mut self) -> Result<Expression, QueryError> {
        let left = self.unary()?;
        let op = match self.peek() {
            Some(Tok::Punct('=')) => CompareOp::Eq,
            Some(Tok::Ne) => CompareOp::Ne,
            Some(Tok::Punct('<')) => CompareOp::Lt,
            Some(Tok::Punct('>')) => CompareOp::Gt,
            Some(Tok::Le) => CompareOp::Le,
            Some(Tok::Ge) => CompareOp::Ge,
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("IN") => return Err(unsupported("IN")),
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("NOT") => return Err(unsupported("NOT IN")),
            _ => return Ok(left),
        };
        self.i += 1;
        let right = self.unary()?;
        Ok(Expression::Compare(op, Box::new(left), Box::new(right)))
    }

    fn unary(&mut self) -> Result<Expression, QueryError> {
        let e = if self.eat_punct('!') {
            Expression::Not(Box::new(self.unary()?))
        } else {
            if matches!(self.peek(), Some(Tok::Punct('+' | '-'))) {
                return Err(unsupported("arithmetic"));
            }
            self.primary()?
        };
        if matches!(self.peek(), Some(Tok::Punct('+' | '-' | '*' | '/'))) {
            return Err(unsupported("arithmetic"));
        }
        if matches!(self.peek(), Some(Tok::Integer(n) | Tok::Decimal(n) | Tok::Double(n)) if n.starts_with(['+', '-']))
        {
            return Err(unsupported("arithmetic"));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expression, QueryError> {
        match self.peek().cloned() {
            Some(Tok::Punct('(')) => {
                self.i += 1;
                let e = self.expression()?;
                self.expect_punct(')')?;
                Ok(e)
            }
            Some(Tok::Var(v)) => {
                self.i += 1;
                Ok(Expression::Variable(Variable::new(v)))
            }
            Some(Tok::Word(w)) if w != "true" && w != "false" => {
                let upper = w.to_ascii_uppercase();
                self.i += 1;
                match upper.as_str() {
                    "BOUND" => {
                        self.expect_punct('(')?;
                        let Some(Tok::Var(v)) = self.next() else {
                            self.i -= 1;
                            return self.error("BOUND expects a variable");
                        };
                        self.expect_punct(')')?;
                        Ok(Expression::Bound(Variable::new(v)))
                    }
                    "REGEX" => {
                        self.expect_punct('(')?;
                        let text = self.expression()?;
                        self.expect_punct(',')?;
                        let pattern = self.expression()?;
                        let flags = if self.eat_punct(',') {
                            Some(Box::new(self.expression()?))
                        } else {
                            None
                        };
                        self.expect_punct(')')?;
                        Ok(Expression::Regex(Box::new(text), Box::new(pattern), flags))
                    }
                    "STR" | "LANG" => {
                        self.expect_punct('(')?;
                        let arg = Box::new(self.expression()?);
                        self.expect_punct(')')?;
                        Ok(if upper == "STR" {
                            Expression::Str(arg)
                        } else {
                            Expression::Lang(arg)
                        })
                    }
                    "EXISTS" | "NOT" => Err(unsupported("EXISTS")),
                    _ if self.is_punct('(') => Err(unsupported(format!("function {w}"))),
                    _ => {
                        self.i -= 1;
                        self.error(format!("unexpected {w:?} in expression"))
                    }
                }
            }
            _ => Ok(Expression::Term(self.constant()?)),
        }
    }
}

fn is_builtin(w: &str) -> bool {
    ["BOUND", "REGEX", "STR", "LANG"].iter().any(|b| w.eq_ignore_ascii_case(b))
}

fn validate(q: &Query) -> Result<(), QueryError> {
    let invalid = |message: String| Err(QueryError::Invalid { message });
    let pattern_vars: HashSet<Variable> = q.pattern.variables().into_iter().collect();
    if let Projection::Items(items) = &q.projection {
        let mut seen = HashSet::new();
        for item in items {
            if !seen.insert(item.output()) {
                return invalid(format!("{} is projected more than once", item.output()));
            }
            if let SelectItem::Count { alias, .. } = item {
                if pattern_vars.contains(alias) {
                    return invalid(format!("COUNT alias {alias} is already used in the pattern"));
                }
            }
        }
        if q.is_grouped() {
            let keys: &[Variable] = q.group_by.as_deref().unwrap_or(&[]);
            for item in items {
                if let SelectItem::Variable(v) = item {
                    if !keys.contains(v) {
                        return invalid(format!("{v} is projected but neither grouped nor aggregated"));
                    }
                }
            }
        }
    } else if q.group_by.is_some() {
        return invalid("SELECT * cannot be combined with GROUP BY".into());
    }
    Ok(())
}
