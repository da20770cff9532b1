use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::rdf::{escape_string, Term, XSD_BOOLEAN};
use crate::sparql::{Expr, Modifiers};

/// A ground value: an RDF term (or `Unbound`), a Skolem application, or the
/// empty identifier `[]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Term(Term),
    Skolem(Arc<SkolemValue>),
    Nil,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkolemValue {
    pub tag: String,
    pub args: Vec<Value>,
}

impl Value {
    pub fn skolem(tag: impl Into<String>, args: Vec<Value>) -> Value {
        Value::Skolem(Arc::new(SkolemValue { tag: tag.into(), args }))
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            Value::Term(t) => Some(t),
            _ => None,
        }
    }
}

impl From<Term> for Value {
    fn from(t: Term) -> Value {
        Value::Term(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DTerm {
    Const(Value),
    Var(String),
    Skolem { tag: String, args: Vec<DTerm> },
}

impl DTerm {
    pub fn var(name: impl Into<String>) -> DTerm {
        DTerm::Var(name.into())
    }

    pub fn term(t: Term) -> DTerm {
        DTerm::Const(Value::Term(t))
    }

    pub fn nil() -> DTerm {
        DTerm::Const(Value::Nil)
    }

    /// A Skolem application; with only ground arguments it is folded into a
    /// constant.
    pub fn skolem(tag: impl Into<String>, args: Vec<DTerm>) -> DTerm {
        match args.iter().map(DTerm::ground).collect::<Option<Vec<Value>>>() {
            Some(vals) => DTerm::Const(Value::skolem(tag, vals)),
            None => DTerm::Skolem { tag: tag.into(), args },
        }
    }

    pub fn ground(&self) -> Option<Value> {
        match self {
            DTerm::Const(v) => Some(v.clone()),
            DTerm::Var(_) => None,
            DTerm::Skolem { tag, args } => {
                Some(Value::skolem(tag.clone(), args.iter().map(DTerm::ground).collect::<Option<_>>()?))
            }
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            DTerm::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            DTerm::Var(v) => {
                out.insert(v.clone());
            }
            DTerm::Const(_) => {}
            DTerm::Skolem { args, .. } => args.iter().for_each(|a| a.vars(out)),
        }
    }

    fn rename(&self, f: &impl Fn(&str) -> String) -> DTerm {
        match self {
            DTerm::Var(v) => DTerm::Var(f(v)),
            DTerm::Const(c) => DTerm::Const(c.clone()),
            DTerm::Skolem { tag, args } => DTerm::Skolem { tag: tag.clone(), args: args.iter().map(|a| a.rename(f)).collect() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<DTerm>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<DTerm>) -> Atom {
        Atom { predicate: predicate.into(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.args.iter().for_each(|a| a.vars(&mut out));
        out
    }
}

/// Built-in body constraints. `Eq` with an unbound variable on one side and
/// a computable other side is an assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Eq(DTerm, DTerm),
    Ne(DTerm, DTerm),
    /// A filter constraint over rule variables with filter-expression
    /// semantics (errors make it false).
    Filter(Expr),
}

impl Builtin {
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match self {
            Builtin::Eq(a, b) | Builtin::Ne(a, b) => {
                a.vars(&mut out);
                b.vars(&mut out);
            }
            Builtin::Filter(e) => out = e.vars(),
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Atom,
    pub positive: Vec<Atom>,
    pub negative: Vec<Atom>,
    pub builtins: Vec<Builtin>,
}

impl Rule {
    pub fn new(head: Atom, positive: Vec<Atom>) -> Rule {
        Rule { head, positive, negative: vec![], builtins: vec![] }
    }

    pub fn fact(head: Atom) -> Rule {
        Rule::new(head, vec![])
    }

    pub fn with_negative(mut self, atoms: Vec<Atom>) -> Rule {
        self.negative.extend(atoms);
        self
    }

    pub fn with_builtins(mut self, builtins: Vec<Builtin>) -> Rule {
        self.builtins.extend(builtins);
        self
    }

    pub fn is_fact(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty() && self.builtins.is_empty()
    }

    pub fn body_predicates(&self) -> impl Iterator<Item = (&str, bool)> {
        self.positive
            .iter()
            .map(|a| (a.predicate.as_str(), false))
            .chain(self.negative.iter().map(|a| (a.predicate.as_str(), true)))
    }

    /// Every variable of the rule.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = self.head.vars();
        for a in self.positive.iter().chain(&self.negative) {
            out.extend(a.vars());
        }
        for b in &self.builtins {
            out.extend(b.vars());
        }
        out
    }

    /// Consistently renames every variable.
    pub fn rename_vars(&self, f: impl Fn(&str) -> String) -> Rule {
        let atom = |a: &Atom| Atom::new(a.predicate.clone(), a.args.iter().map(|t| t.rename(&f)).collect());
        Rule {
            head: atom(&self.head),
            positive: self.positive.iter().map(atom).collect(),
            negative: self.negative.iter().map(atom).collect(),
            builtins: self
                .builtins
                .iter()
                .map(|b| match b {
                    Builtin::Eq(x, y) => Builtin::Eq(x.rename(&f), y.rename(&f)),
                    Builtin::Ne(x, y) => Builtin::Ne(x.rename(&f), y.rename(&f)),
                    Builtin::Filter(e) => Builtin::Filter(e.substitute(&mut |v| Expr::Var(f(v)))),
                })
                .collect(),
        }
    }
}

/// A ground fact over RDF terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Fact {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Fact {
        Fact { predicate: predicate.into(), args }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GoalKind {
    /// Output variables in projection order.
    Select { projection: Vec<String> },
    Ask,
}

/// Describes how the answer predicate maps back to query solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goal {
    pub predicate: String,
    pub kind: GoalKind,
    /// Query variable for each answer column between the optional ID
    /// column and the optional graph column.
    pub columns: Vec<String>,
    pub has_id: bool,
    pub has_graph: bool,
    pub modifiers: Modifiers,
}

impl Goal {
    /// Arity of the answer predicate. An ask goal has the single boolean
    /// column `HasResult`.
    pub fn arity(&self) -> usize {
        match self.kind {
            GoalKind::Ask => 1,
            GoalKind::Select { .. } => self.columns.len() + usize::from(self.has_id) + usize::from(self.has_graph),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub goal: Option<Goal>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Program {
        Program { rules, goal: None }
    }

    /// Arity of every predicate; the first conflicting use is an error.
    pub fn arities(&self) -> Result<BTreeMap<String, usize>, super::DatalogError> {
        arities_of(self.rules.iter())
    }

    pub fn predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.insert(r.head.predicate.clone());
            for (p, _) in r.body_predicates() {
                out.insert(p.to_string());
            }
        }
        out
    }
}

pub(crate) fn arities_of<'a>(rules: impl Iterator<Item = &'a Rule>) -> Result<BTreeMap<String, usize>, super::DatalogError> {
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    for r in rules {
        for a in std::iter::once(&r.head).chain(&r.positive).chain(&r.negative) {
            match out.get(&a.predicate) {
                Some(&n) if n != a.arity() => {
                    return Err(super::DatalogError::ArityMismatch {
                        predicate: a.predicate.clone(),
                        expected: n,
                        found: a.arity(),
                    })
                }
                _ => {
                    out.insert(a.predicate.clone(), a.arity());
                }
            }
        }
    }
    Ok(out)
}

pub(crate) fn write_term(f: &mut impl fmt::Write, t: &Term) -> fmt::Result {
    match t {
        Term::Unbound => f.write_str("null"),
        Term::Literal(l) if l.datatype.as_deref() == Some(XSD_BOOLEAN) && (l.lexical == "true" || l.lexical == "false") => {
            f.write_str(&l.lexical)
        }
        t => write!(f, "{t}"),
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Term(t) => write_term(f, t),
            Value::Nil => f.write_str("[]"),
            Value::Skolem(s) => {
                f.write_str("[\"")?;
                escape_string(f, &s.tag)?;
                f.write_str("\"")?;
                for a in &s.args {
                    write!(f, ", {a}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl fmt::Display for DTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DTerm::Var(v) => f.write_str(v),
            DTerm::Const(c) => c.fmt(f),
            DTerm::Skolem { tag, args } => {
                f.write_str("[\"")?;
                escape_string(f, tag)?;
                f.write_str("\"")?;
                for a in args {
                    write!(f, ", {a}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Eq(a, b) => write!(f, "{a} = {b}"),
            Builtin::Ne(a, b) => write!(f, "{a} != {b}"),
            Builtin::Filter(e) => write!(f, "filter({e})"),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let mut parts: Vec<String> = self.positive.iter().map(|a| a.to_string()).collect();
        parts.extend(self.negative.iter().map(|a| format!("not {a}")));
        parts.extend(self.builtins.iter().map(|b| b.to_string()));
        if !parts.is_empty() {
            write!(f, " :- {}", parts.join(", "))?;
        }
        f.write_str(".")
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_term(f, a)?;
        }
        f.write_str(").")
    }
}
