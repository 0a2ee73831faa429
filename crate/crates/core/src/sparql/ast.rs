use std::fmt;

use crate::rdf::{PrefixMap, Term};

/// A query variable, stored without its `?`/`$` sigil.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Blank nodes in query patterns act as variables that `SELECT *` hides.
    pub fn is_hidden(&self) -> bool {
        self.0.starts_with("_:")
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermPattern {
    Term(Term),
    Variable(Variable),
}

impl TermPattern {
    pub fn variable(&self) -> Option<&Variable> {
        match self {
            TermPattern::Variable(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(TermPattern::variable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    Variable(Variable),
    Term(Term),
    Or(Box<Expression>, Box<Expression>),
    And(Box<Expression>, Box<Expression>),
    Not(Box<Expression>),
    Compare(CompareOp, Box<Expression>, Box<Expression>),
    Bound(Variable),
    Regex(Box<Expression>, Box<Expression>, Option<Box<Expression>>),
    Str(Box<Expression>),
    Lang(Box<Expression>),
}

/// One element of a `{ ... }` group, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupElement {
    Triple(TriplePattern),
    Optional(GroupPattern),
    Filter(Expression),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupPattern {
    pub elements: Vec<GroupElement>,
}

impl GroupPattern {
    pub fn triples(&self) -> impl Iterator<Item = &TriplePattern> {
        self.elements.iter().filter_map(|e| match e {
            GroupElement::Triple(t) => Some(t),
            _ => None,
        })
    }

    pub fn filters(&self) -> impl Iterator<Item = &Expression> {
        self.elements.iter().filter_map(|e| match e {
            GroupElement::Filter(f) => Some(f),
            _ => None,
        })
    }

    /// Variables of all triple patterns, nested OPTIONALs included, in
    /// order of first appearance.
    pub fn variables(&self) -> Vec<Variable> {
        let mut out: Vec<Variable> = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut Vec<Variable>) {
        for e in &self.elements {
            match e {
                GroupElement::Triple(t) => {
                    for v in t.variables() {
                        if !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                }
                GroupElement::Optional(g) => g.collect_variables(out),
                GroupElement::Filter(_) => {}
            }
        }
    }

    pub fn optional_depth(&self) -> usize {
        self.elements
            .iter()
            .filter_map(|e| match e {
                GroupElement::Optional(g) => Some(1 + g.optional_depth()),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectItem {
    Variable(Variable),
    /// `(COUNT(?v) AS ?alias)`, or `COUNT(*)` when `counted` is `None`.
    Count {
        counted: Option<Variable>,
        alias: Variable,
    },
}

impl SelectItem {
    pub fn output(&self) -> &Variable {
        match self {
            SelectItem::Variable(v) => v,
            SelectItem::Count { alias, .. } => alias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Items(Vec<SelectItem>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderCondition {
    pub expression: Expression,
    pub descending: bool,
}

/// A parsed SELECT query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub prefixes: PrefixMap,
    pub distinct: bool,
    pub projection: Projection,
    pub pattern: GroupPattern,
    pub group_by: Option<Vec<Variable>>,
    pub order_by: Vec<OrderCondition>,
    pub limit: Option<usize>,
    pub offset: Option<usize>,
}

impl Query {
    /// Whether results are grouped, explicitly or by an aggregate alone.
    pub fn is_grouped(&self) -> bool {
        self.group_by.is_some()
            || matches!(&self.projection, Projection::Items(items)
                if items.iter().any(|i| matches!(i, SelectItem::Count { .. })))
    }

    /// Result variables in output order.
    pub fn result_variables(&self) -> Vec<Variable> {
        match &self.projection {
            Projection::All => self.pattern.variables().into_iter().filter(|v| !v.is_hidden()).collect(),
            Projection::Items(items) => items.iter().map(|i| i.output().clone()).collect(),
        }
    }
}
