use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use regex::Regex;

use crate::rdf::{escape_string, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeTest {
    IsIri,
    IsBlank,
    IsLiteral,
    IsNumeric,
}

impl TypeTest {
    pub fn name(self) -> &'static str {
        match self {
            TypeTest::IsIri => "isIRI",
            TypeTest::IsBlank => "isBLANK",
            TypeTest::IsLiteral => "isLITERAL",
            TypeTest::IsNumeric => "isNUMERIC",
        }
    }
}

/// A `REGEX` pattern with its flags; the compiled form is cached.
#[derive(Clone)]
pub struct RegexSpec {
    pub pattern: String,
    pub flags: String,
    compiled: Arc<OnceLock<Option<Regex>>>,
}

impl RegexSpec {
    pub fn new(pattern: impl Into<String>, flags: impl Into<String>) -> RegexSpec {
        RegexSpec { pattern: pattern.into(), flags: flags.into(), compiled: Arc::new(OnceLock::new()) }
    }

    /// The compiled expression, or `None` when the pattern is invalid or a
    /// flag other than `i` is given.
    pub fn regex(&self) -> Option<&Regex> {
        self.compiled
            .get_or_init(|| {
                let mut prefix = String::new();
                for f in self.flags.chars() {
                    match f {
                        'i' => prefix = "(?i)".into(),
                        _ => return None,
                    }
                }
                Regex::new(&format!("{prefix}{}", self.pattern)).ok()
            })
            .as_ref()
    }

    fn key(&self) -> (&str, &str) {
        (&self.pattern, &self.flags)
    }
}

impl fmt::Debug for RegexSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegexSpec").field("pattern", &self.pattern).field("flags", &self.flags).finish()
    }
}

impl PartialEq for RegexSpec {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for RegexSpec {}

impl Hash for RegexSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for RegexSpec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RegexSpec {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Filter constraint expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(String),
    Const(Term),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Bound(Box<Expr>),
    Test(TypeTest, Box<Expr>),
    Regex(Box<Expr>, RegexSpec),
}

/// Evaluation failed; a constraint that errors does not hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalError;

type Eval<T> = Result<T, EvalError>;

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn constant(t: Term) -> Expr {
        Expr::Const(t)
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Compare(op, Box::new(a), Box::new(b))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: Expr) -> Expr {
        Expr::Not(Box::new(a))
    }

    pub fn bound(name: impl Into<String>) -> Expr {
        Expr::Bound(Box::new(Expr::var(name)))
    }

    pub fn test(t: TypeTest, a: Expr) -> Expr {
        Expr::Test(t, Box::new(a))
    }

    pub fn regex(a: Expr, pattern: impl Into<String>, flags: impl Into<String>) -> Expr {
        Expr::Regex(Box::new(a), RegexSpec::new(pattern, flags))
    }

    /// Variables referenced anywhere in the expression.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Const(_) => {}
            Expr::Not(a) | Expr::Bound(a) | Expr::Test(_, a) | Expr::Regex(a, _) => a.collect_vars(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Compare(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces every variable by the expression `f` returns for it.
    pub fn substitute(&self, f: &mut impl FnMut(&str) -> Expr) -> Expr {
        let mut go = |e: &Expr| Box::new(e.substitute(f));
        match self {
            Expr::Var(v) => f(v),
            Expr::Const(t) => Expr::Const(t.clone()),
            Expr::Not(a) => Expr::Not(go(a)),
            Expr::Bound(a) => Expr::Bound(go(a)),
            Expr::Test(t, a) => Expr::Test(*t, go(a)),
            Expr::Regex(a, r) => Expr::Regex(go(a), r.clone()),
            Expr::And(a, b) => {
                let a = go(a);
                Expr::And(a, go(b))
            }
            Expr::Or(a, b) => {
                let a = go(a);
                Expr::Or(a, go(b))
            }
            Expr::Compare(op, a, b) => {
                let a = go(a);
                Expr::Compare(*op, a, go(b))
            }
        }
    }

    /// Evaluates the constraint; errors count as false.
    pub fn holds(&self, lookup: &mut impl FnMut(&str) -> Term) -> bool {
        self.truth(lookup).unwrap_or(false)
    }

    fn truth(&self, lookup: &mut impl FnMut(&str) -> Term) -> Eval<bool> {
        match self {
            Expr::Not(a) => a.truth(lookup).map(|b| !b),
            Expr::And(a, b) => match (a.truth(lookup), b.truth(lookup)) {
                (Ok(false), _) | (_, Ok(false)) => Ok(false),
                (Ok(true), Ok(true)) => Ok(true),
                _ => Err(EvalError),
            },
            Expr::Or(a, b) => match (a.truth(lookup), b.truth(lookup)) {
                (Ok(true), _) | (_, Ok(true)) => Ok(true),
                (Ok(false), Ok(false)) => Ok(false),
                _ => Err(EvalError),
            },
            Expr::Compare(op, a, b) => compare(*op, &a.value(lookup)?, &b.value(lookup)?),
            Expr::Bound(a) => match &**a {
                Expr::Var(v) => Ok(!lookup(v).is_unbound()),
                Expr::Const(t) => Ok(!t.is_unbound()),
                _ => Err(EvalError),
            },
            Expr::Test(test, a) => {
                let t = a.value(lookup)?;
                Ok(match test {
                    TypeTest::IsIri => t.is_iri(),
                    TypeTest::IsBlank => t.is_blank(),
                    TypeTest::IsLiteral => t.is_literal(),
                    TypeTest::IsNumeric => t.numeric_value().is_some(),
                })
            }
            Expr::Regex(a, re_spec) => {
                let t = a.value(lookup)?;
                let lit = t.as_literal().filter(|l| l.is_simple() || l.lang.is_some()).ok_or(EvalError)?;
                let re = re_spec.regex().ok_or(EvalError)?;
                Ok(re.is_match(&lit.lexical))
            }
            Expr::Var(_) | Expr::Const(_) => effective_boolean(&self.value(lookup)?),
        }
    }

    fn value(&self, lookup: &mut impl FnMut(&str) -> Term) -> Eval<Term> {
        let t = match self {
            Expr::Var(v) => lookup(v),
            Expr::Const(t) => t.clone(),
            other => Term::boolean(other.truth(lookup)?),
        };
        if t.is_unbound() {
            Err(EvalError)
        } else {
            Ok(t)
        }
    }
}

fn effective_boolean(t: &Term) -> Eval<bool> {
    if let Some(b) = t.boolean_value() {
        return Ok(b);
    }
    if let Some(n) = t.numeric_value() {
        return Ok(n != 0.0 && !n.is_nan());
    }
    match t.as_literal() {
        Some(l) if l.is_simple() => Ok(!l.lexical.is_empty()),
        _ => Err(EvalError),
    }
}

fn compare(op: CmpOp, a: &Term, b: &Term) -> Eval<bool> {
    let ordering = if let (Some(x), Some(y)) = (a.numeric_value(), b.numeric_value()) {
        match x.partial_cmp(&y) {
            Some(o) => Some(o),
            None => return Ok(op == CmpOp::Ne),
        }
    } else if let (Some(x), Some(y)) = (a.boolean_value(), b.boolean_value()) {
        Some(x.cmp(&y))
    } else {
        match (a.as_literal(), b.as_literal()) {
            (Some(x), Some(y)) if x.is_simple() && y.is_simple() => Some(x.lexical.cmp(&y.lexical)),
            _ => None,
        }
    };
    match (op, ordering) {
        (CmpOp::Eq, Some(o)) => Ok(o == Ordering::Equal),
        (CmpOp::Ne, Some(o)) => Ok(o != Ordering::Equal),
        (CmpOp::Eq, None) => Ok(a == b),
        (CmpOp::Ne, None) => Ok(a != b),
        (CmpOp::Lt, Some(o)) => Ok(o == Ordering::Less),
        (CmpOp::Le, Some(o)) => Ok(o != Ordering::Greater),
        (CmpOp::Gt, Some(o)) => Ok(o == Ordering::Greater),
        (CmpOp::Ge, Some(o)) => Ok(o != Ordering::Less),
        (_, None) => Err(EvalError),
    }
}

/// SPARQL surface syntax, fully parenthesized; `Unbound` prints as `UNDEF`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "?{v}"),
            Expr::Const(Term::Unbound) => f.write_str("UNDEF"),
            Expr::Const(t) => write!(f, "{t}"),
            Expr::Not(a) => write!(f, "!({a})"),
            Expr::And(a, b) => write!(f, "({a} && {b})"),
            Expr::Or(a, b) => write!(f, "({a} || {b})"),
            Expr::Compare(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Bound(a) => write!(f, "BOUND({a})"),
            Expr::Test(t, a) => write!(f, "{}({a})", t.name()),
            Expr::Regex(a, re_spec) => {
                write!(f, "REGEX({a}, \"")?;
                escape_string(f, &re_spec.pattern)?;
                f.write_str("\", \"")?;
                escape_string(f, &re_spec.flags)?;
                f.write_str("\")")
            }
        }
    }
}
