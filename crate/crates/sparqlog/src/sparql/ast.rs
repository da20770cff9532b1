use std::collections::BTreeSet;
use std::fmt;

use super::expr::Expr;
use crate::rdf::Term;

/// A term position in a pattern: a variable or an RDF term. Query blank
/// nodes are variables whose name starts with `_:`; they never appear in
/// `SELECT *` projections.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermPattern {
    Var(String),
    Term(Term),
}

impl TermPattern {
    pub fn var(name: impl Into<String>) -> TermPattern {
        TermPattern::Var(name.into())
    }

    pub fn iri(iri: impl Into<String>) -> TermPattern {
        TermPattern::Term(Term::iri(iri))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Term(_) => None,
        }
    }
}

pub fn is_hidden_var(name: &str) -> bool {
    name.starts_with("_:")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    pub index: u128,
    pub kind: PathKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PathKind {
    Link(String),
    Inverse(Box<Path>),
    Alternative(Box<Path>, Box<Path>),
    Sequence(Box<Path>, Box<Path>),
    ZeroOrOne(Box<Path>),
    OneOrMore(Box<Path>),
    ZeroOrMore(Box<Path>),
    Negated { forward: Vec<String>, backward: Vec<String> },
}

impl Path {
    pub fn new(kind: PathKind) -> Path {
        Path { index: 0, kind }
    }

    pub fn link(iri: impl Into<String>) -> Path {
        Path::new(PathKind::Link(iri.into()))
    }

    pub fn inverse(p: Path) -> Path {
        Path::new(PathKind::Inverse(Box::new(p)))
    }

    pub fn alternative(a: Path, b: Path) -> Path {
        Path::new(PathKind::Alternative(Box::new(a), Box::new(b)))
    }

    pub fn sequence(a: Path, b: Path) -> Path {
        Path::new(PathKind::Sequence(Box::new(a), Box::new(b)))
    }

    pub fn zero_or_one(p: Path) -> Path {
        Path::new(PathKind::ZeroOrOne(Box::new(p)))
    }

    pub fn one_or_more(p: Path) -> Path {
        Path::new(PathKind::OneOrMore(Box::new(p)))
    }

    pub fn zero_or_more(p: Path) -> Path {
        Path::new(PathKind::ZeroOrMore(Box::new(p)))
    }

    pub fn negated(forward: Vec<String>, backward: Vec<String>) -> Path {
        Path::new(PathKind::Negated { forward, backward })
    }

    pub fn children(&self) -> Vec<&Path> {
        match &self.kind {
            PathKind::Link(_) | PathKind::Negated { .. } => vec![],
            PathKind::Inverse(a) | PathKind::ZeroOrOne(a) | PathKind::OneOrMore(a) | PathKind::ZeroOrMore(a) => vec![a],
            PathKind::Alternative(a, b) | PathKind::Sequence(a, b) => vec![a, b],
        }
    }

    fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    fn assign(&mut self, index: u128) {
        self.index = index;
        match &mut self.kind {
            PathKind::Link(_) | PathKind::Negated { .. } => {}
            PathKind::Inverse(a) | PathKind::ZeroOrOne(a) | PathKind::OneOrMore(a) | PathKind::ZeroOrMore(a) => {
                a.assign(2 * index)
            }
            PathKind::Alternative(a, b) | PathKind::Sequence(a, b) => {
                a.assign(2 * index);
                b.assign(2 * index + 1);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub index: u128,
    pub kind: PatternKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PatternKind {
    /// The empty group: one solution binding nothing.
    Unit,
    Triple { subject: TermPattern, predicate: TermPattern, object: TermPattern },
    Path { subject: TermPattern, path: Path, object: TermPattern },
    Join(Box<Pattern>, Box<Pattern>),
    Union(Box<Pattern>, Box<Pattern>),
    Optional(Box<Pattern>, Box<Pattern>),
    OptionalFilter(Box<Pattern>, Box<Pattern>, Expr),
    Minus(Box<Pattern>, Box<Pattern>),
    Filter(Box<Pattern>, Expr),
    Graph(TermPattern, Box<Pattern>),
}

impl Pattern {
    pub fn new(kind: PatternKind) -> Pattern {
        Pattern { index: 0, kind }
    }

    pub fn unit() -> Pattern {
        Pattern::new(PatternKind::Unit)
    }

    pub fn triple(subject: TermPattern, predicate: TermPattern, object: TermPattern) -> Pattern {
        Pattern::new(PatternKind::Triple { subject, predicate, object })
    }

    pub fn path(subject: TermPattern, path: Path, object: TermPattern) -> Pattern {
        Pattern::new(PatternKind::Path { subject, path, object })
    }

    pub fn join(a: Pattern, b: Pattern) -> Pattern {
        Pattern::new(PatternKind::Join(Box::new(a), Box::new(b)))
    }

    pub fn union(a: Pattern, b: Pattern) -> Pattern {
        Pattern::new(PatternKind::Union(Box::new(a), Box::new(b)))
    }

    pub fn optional(a: Pattern, b: Pattern) -> Pattern {
        Pattern::new(PatternKind::Optional(Box::new(a), Box::new(b)))
    }

    pub fn optional_filter(a: Pattern, b: Pattern, c: Expr) -> Pattern {
        Pattern::new(PatternKind::OptionalFilter(Box::new(a), Box::new(b), c))
    }

    pub fn minus(a: Pattern, b: Pattern) -> Pattern {
        Pattern::new(PatternKind::Minus(Box::new(a), Box::new(b)))
    }

    pub fn filter(a: Pattern, c: Expr) -> Pattern {
        Pattern::new(PatternKind::Filter(Box::new(a), c))
    }

    pub fn graph(g: TermPattern, a: Pattern) -> Pattern {
        Pattern::new(PatternKind::Graph(g, Box::new(a)))
    }

    pub fn children(&self) -> Vec<&Pattern> {
        match &self.kind {
            PatternKind::Unit | PatternKind::Triple { .. } | PatternKind::Path { .. } => vec![],
            PatternKind::Filter(a, _) | PatternKind::Graph(_, a) => vec![a],
            PatternKind::Join(a, b)
            | PatternKind::Union(a, b)
            | PatternKind::Optional(a, b)
            | PatternKind::OptionalFilter(a, b, _)
            | PatternKind::Minus(a, b) => vec![a, b],
        }
    }

    /// The variables of the pattern in the sense used by the translation:
    /// everything that can be bound by it.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        let mut add = |t: &TermPattern| {
            if let TermPattern::Var(v) = t {
                out.insert(v.clone());
            }
        };
        match &self.kind {
            PatternKind::Unit => {}
            PatternKind::Triple { subject, predicate, object } => {
                add(subject);
                add(predicate);
                add(object);
            }
            PatternKind::Path { subject, object, .. } => {
                add(subject);
                add(object);
            }
            PatternKind::Graph(g, a) => {
                add(g);
                a.collect_vars(out);
            }
            PatternKind::Filter(a, _) | PatternKind::Minus(a, _) => a.collect_vars(out),
            PatternKind::Join(a, b)
            | PatternKind::Union(a, b)
            | PatternKind::Optional(a, b)
            | PatternKind::OptionalFilter(a, b, _) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Number of levels in the combined pattern and path tree.
    pub fn depth(&self) -> usize {
        let own = match &self.kind {
            PatternKind::Path { path, .. } => path.depth(),
            _ => 0,
        };
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0).max(own)
    }

    fn assign(&mut self, index: u128) {
        self.index = index;
        match &mut self.kind {
            PatternKind::Unit | PatternKind::Triple { .. } => {}
            PatternKind::Path { path, .. } => path.assign(2 * index),
            PatternKind::Filter(a, _) | PatternKind::Graph(_, a) => a.assign(2 * index),
            PatternKind::Join(a, b)
            | PatternKind::Union(a, b)
            | PatternKind::Optional(a, b)
            | PatternKind::OptionalFilter(a, b, _)
            | PatternKind::Minus(a, b) => {
                a.assign(2 * index);
                b.assign(2 * index + 1);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderKey {
    pub var: String,
    pub descending: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Modifiers {
    pub distinct: bool,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Projection {
    All,
    Vars(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QueryForm {
    Select(Projection),
    Ask,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DatasetClause {
    From(String),
    FromNamed(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub form: QueryForm,
    pub dataset: Vec<DatasetClause>,
    pub pattern: Pattern,
    pub modifiers: Modifiers,
}

pub const MAX_TREE_DEPTH: usize = 120;

impl Query {
    pub fn select(vars: &[&str], pattern: Pattern) -> Query {
        Query {
            form: QueryForm::Select(Projection::Vars(vars.iter().map(|v| v.to_string()).collect())),
            dataset: vec![],
            pattern,
            modifiers: Modifiers::default(),
        }
    }

    pub fn ask(pattern: Pattern) -> Query {
        Query { form: QueryForm::Ask, dataset: vec![], pattern, modifiers: Modifiers::default() }
    }

    pub fn distinct(mut self, distinct: bool) -> Query {
        self.modifiers.distinct = distinct;
        self
    }

    pub fn is_distinct(&self) -> bool {
        self.modifiers.distinct
    }

    /// Projected variables in output order: the explicit list, or for
    /// `SELECT *` the visible pattern variables sorted by name. Duplicates
    /// in an explicit list are kept once.
    pub fn projection(&self) -> Vec<String> {
        match &self.form {
            QueryForm::Ask => vec![],
            QueryForm::Select(Projection::All) => {
                self.pattern.vars().into_iter().filter(|v| !is_hidden_var(v)).collect()
            }
            QueryForm::Select(Projection::Vars(vs)) => {
                let mut seen = BTreeSet::new();
                vs.iter().filter(|v| seen.insert(v.as_str())).cloned().collect()
            }
        }
    }
}

/// Assigns pattern indices: the root is 1 and the children of node `i` are
/// `2i` and `2i + 1`; the path of a path pattern `i` is rooted at `2i`.
pub fn index_patterns(mut q: Query) -> Query {
    q.pattern.assign(1);
    q
}

fn write_path(f: &mut fmt::Formatter<'_>, p: &Path) -> fmt::Result {
    match &p.kind {
        PathKind::Link(iri) => write!(f, "{}", Term::iri(iri.clone())),
        PathKind::Inverse(a) => {
            f.write_str("^(")?;
            write_path(f, a)?;
            f.write_str(")")
        }
        PathKind::Alternative(a, b) | PathKind::Sequence(a, b) => {
            let sep = if matches!(p.kind, PathKind::Alternative(..)) { " | " } else { " / " };
            f.write_str("(")?;
            write_path(f, a)?;
            f.write_str(sep)?;
            write_path(f, b)?;
            f.write_str(")")
        }
        PathKind::ZeroOrOne(a) | PathKind::OneOrMore(a) | PathKind::ZeroOrMore(a) => {
            let m = match p.kind {
                PathKind::ZeroOrOne(_) => "?",
                PathKind::OneOrMore(_) => "+",
                _ => "*",
            };
            f.write_str("(")?;
            write_path(f, a)?;
            write!(f, "){m}")
        }
        PathKind::Negated { forward, backward } => {
            let items: Vec<String> = forward
                .iter()
                .map(|i| Term::iri(i.clone()).to_string())
                .chain(backward.iter().map(|i| format!("^{}", Term::iri(i.clone()))))
                .collect();
            write!(f, "!({})", items.join(" | "))
        }
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Var(v) if is_hidden_var(v) => f.write_str(v),
            TermPattern::Var(v) => write!(f, "?{v}"),
            TermPattern::Term(t) => write!(f, "{t}"),
        }
    }
}

/// Prints the pattern as a group whose parse is this very pattern, except
/// that a path pattern over a single link reads back as a triple pattern.
impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PatternKind::Unit => f.write_str("{ }"),
            PatternKind::Triple { subject, predicate, object } => write!(f, "{{ {subject} {predicate} {object} . }}"),
            PatternKind::Path { subject, path, object } => {
                write!(f, "{{ {subject} ")?;
                if let PathKind::Link(_) = path.kind {
                    f.write_str("(")?;
                    write_path(f, path)?;
                    f.write_str(")")?;
                } else {
                    write_path(f, path)?;
                }
                write!(f, " {object} . }}")
            }
            PatternKind::Join(a, b) => write!(f, "{{ {a} {b} }}"),
            PatternKind::Union(a, b) => write!(f, "{{ {a} UNION {b} }}"),
            PatternKind::Optional(a, b) if matches!(b.kind, PatternKind::Filter(..)) => {
                write!(f, "{{ {a} OPTIONAL {{ {b} }} }}")
            }
            PatternKind::Optional(a, b) => write!(f, "{{ {a} OPTIONAL {b} }}"),
            PatternKind::OptionalFilter(a, b, c) => write!(f, "{{ {a} OPTIONAL {{ {b} FILTER ({c}) }} }}"),
            PatternKind::Minus(a, b) => write!(f, "{{ {a} MINUS {b} }}"),
            PatternKind::Filter(a, c) => write!(f, "{{ {a} FILTER ({c}) }}"),
            PatternKind::Graph(g, a) => write!(f, "{{ GRAPH {g} {a} }}"),
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            QueryForm::Ask => f.write_str("ASK")?,
            QueryForm::Select(p) => {
                f.write_str("SELECT")?;
                if self.modifiers.distinct {
                    f.write_str(" DISTINCT")?;
                }
                match p {
                    Projection::All => f.write_str(" *")?,
                    Projection::Vars(vs) => {
                        for v in vs {
                            write!(f, " ?{v}")?;
                        }
                    }
                }
            }
        }
        f.write_str("\n")?;
        for d in &self.dataset {
            match d {
                DatasetClause::From(i) => writeln!(f, "FROM {}", Term::iri(i.clone()))?,
                DatasetClause::FromNamed(i) => writeln!(f, "FROM NAMED {}", Term::iri(i.clone()))?,
            }
        }
        writeln!(f, "WHERE {}", self.pattern)?;
        if !self.modifiers.order_by.is_empty() {
            f.write_str("ORDER BY")?;
            for k in &self.modifiers.order_by {
                write!(f, " {}(?{})", if k.descending { "DESC" } else { "ASC" }, k.var)?;
            }
            f.write_str("\n")?;
        }
        if let Some(l) = self.modifiers.limit {
            writeln!(f, "LIMIT {l}")?;
        }
        if let Some(o) = self.modifiers.offset {
            writeln!(f, "OFFSET {o}")?;
        }
        Ok(())
    }
}
