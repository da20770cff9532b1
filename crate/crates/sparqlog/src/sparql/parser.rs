use std::collections::HashMap;

use super::ast::*;
use super::expr::{CmpOp, Expr, TypeTest};
use super::lexer::{tokenize, Tok, Token};
use super::QueryError;
use crate::rdf::{Literal, Term, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER};

const MAX_NESTING: usize = 64;

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "CONSTRUCT", "DESCRIBE", "GROUP", "HAVING", "BIND", "VALUES", "SERVICE", "EXISTS", "INSERT", "DELETE", "LOAD",
    "CLEAR", "CREATE", "DROP", "WITH", "USING",
];

const UNSUPPORTED_FUNCTIONS: &[&str] = &[
    "STR", "LANG", "LANGMATCHES", "DATATYPE", "IRI", "URI", "BNODE", "RAND", "ABS", "CEIL", "FLOOR", "ROUND", "CONCAT",
    "STRLEN", "UCASE", "LCASE", "ENCODE_FOR_URI", "CONTAINS", "STRSTARTS", "STRENDS", "STRBEFORE", "STRAFTER", "YEAR",
    "MONTH", "DAY", "HOURS", "MINUTES", "SECONDS", "TIMEZONE", "TZ", "NOW", "UUID", "STRUUID", "MD5", "SHA1", "SHA256",
    "SHA384", "SHA512", "COALESCE", "IF", "STRLANG", "STRDT", "SAMETERM", "SUBSTR", "REPLACE", "COUNT", "SUM", "MIN",
    "MAX", "AVG", "SAMPLE", "GROUP_CONCAT", "NOT", "EXISTS",
];

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    i: usize,
    prefixes: HashMap<String, String>,
    base: Option<String>,
    depth: usize,
    anon: usize,
}

type R<T> = Result<T, QueryError>;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> R<Parser<'a>> {
        Ok(Parser { src, toks: tokenize(src)?, i: 0, prefixes: HashMap::new(), base: None, depth: 0, anon: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.i + 1).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.src.len(), |t| t.pos)
    }

    fn err<T>(&self, msg: impl Into<String>) -> R<T> {
        Err(QueryError::syntax(self.src, self.pos(), msg))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.tok.clone());
        self.i += 1;
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> R<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.err(format!("expected '{p}'"))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> R<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return self.err("nesting too deep");
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn check_unsupported_word(&self) -> R<()> {
        if let Some(Tok::Word(w)) = self.peek() {
            let upper = w.to_ascii_uppercase();
            if UNSUPPORTED_KEYWORDS.contains(&upper.as_str()) {
                return Err(QueryError::Unsupported(upper));
            }
        }
        Ok(())
    }

    fn resolve(&self, iri: String) -> String {
        match &self.base {
            Some(base) if !iri.contains(':') => format!("{base}{iri}"),
            _ => iri,
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> R<String> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => self.err(format!("undeclared prefix '{prefix}:'")),
        }
    }

    fn iri_token(&mut self) -> R<Option<String>> {
        match self.peek().cloned() {
            Some(Tok::Iri(i)) => {
                self.i += 1;
                Ok(Some(self.resolve(i)))
            }
            Some(Tok::PName(p, l)) => {
                let iri = self.expand(&p, &l)?;
                self.i += 1;
                Ok(Some(iri))
            }
            _ => Ok(None),
        }
    }

    fn expect_iri(&mut self) -> R<String> {
        match self.iri_token()? {
            Some(i) => Ok(i),
            None => self.err("expected IRI"),
        }
    }

    fn query(&mut self) -> R<Query> {
        loop {
            if self.eat_word("PREFIX") {
                let (prefix, local) = match self.bump() {
                    Some(Tok::PName(p, l)) => (p, l),
                    _ => {
                        self.i -= 1;
                        return self.err("expected prefix name");
                    }
                };
                if !local.is_empty() {
                    return self.err("prefix declaration must end with ':'");
                }
                let iri = match self.bump() {
                    Some(Tok::Iri(i)) => self.resolve(i),
                    _ => {
                        self.i -= 1;
                        return self.err("expected IRI");
                    }
                };
                self.prefixes.insert(prefix, iri);
            } else if self.eat_word("BASE") {
                match self.bump() {
                    Some(Tok::Iri(i)) => self.base = Some(i),
                    _ => {
                        self.i -= 1;
                        return self.err("expected IRI");
                    }
                }
            } else {
                break;
            }
        }
        self.check_unsupported_word()?;
        let mut modifiers = Modifiers::default();
        let form = if self.eat_word("SELECT") {
            if self.eat_word("DISTINCT") {
                modifiers.distinct = true;
            } else {
                self.eat_word("REDUCED");
            }
            if self.eat_punct("*") {
                QueryForm::Select(Projection::All)
            } else {
                let mut vars = Vec::new();
                while let Some(Tok::Var(v)) = self.peek() {
                    vars.push(v.clone());
                    self.i += 1;
                }
                if vars.is_empty() {
                    if self.is_punct("(") {
                        return Err(QueryError::Unsupported("projection expressions".into()));
                    }
                    return self.err("expected projection variables or '*'");
                }
                if self.is_punct("(") {
                    return Err(QueryError::Unsupported("projection expressions".into()));
                }
                QueryForm::Select(Projection::Vars(vars))
            }
        } else if self.eat_word("ASK") {
            QueryForm::Ask
        } else {
            return self.err("expected SELECT or ASK");
        };
        let mut dataset = Vec::new();
        while self.eat_word("FROM") {
            if self.eat_word("NAMED") {
                dataset.push(DatasetClause::FromNamed(self.expect_iri()?));
            } else {
                dataset.push(DatasetClause::From(self.expect_iri()?));
            }
        }
        self.eat_word("WHERE");
        let pattern = self.group()?;
        self.check_unsupported_word()?;
        if self.eat_word("ORDER") {
            if !self.eat_word("BY") {
                return self.err("expected BY");
            }
            loop {
                let descending = if self.eat_word("ASC") {
                    false
                } else if self.eat_word("DESC") {
                    true
                } else if let Some(Tok::Var(v)) = self.peek().cloned() {
                    self.i += 1;
                    modifiers.order_by.push(OrderKey { var: v, descending: false });
                    continue;
                } else {
                    break;
                };
                self.expect_punct("(")?;
                let var = match self.bump() {
                    Some(Tok::Var(v)) => v,
                    _ => return Err(QueryError::Unsupported("ORDER BY expressions".into())),
                };
                self.expect_punct(")")?;
                modifiers.order_by.push(OrderKey { var, descending });
            }
            if modifiers.order_by.is_empty() {
                if self.is_punct("(") || matches!(self.peek(), Some(Tok::Word(_))) {
                    return Err(QueryError::Unsupported("ORDER BY expressions".into()));
                }
                return self.err("expected ordering condition");
            }
        }
        loop {
            if self.eat_word("LIMIT") {
                modifiers.limit = Some(self.count()?);
            } else if self.eat_word("OFFSET") {
                modifiers.offset = Some(self.count()?);
            } else {
                break;
            }
        }
        self.check_unsupported_word()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        if form == QueryForm::Ask && (!modifiers.order_by.is_empty() || modifiers.limit.is_some() || modifiers.offset.is_some()) {
            return Err(QueryError::Unsupported("solution modifiers on ASK".into()));
        }
        let q = Query { form, dataset, pattern, modifiers };
        let projected = q.projection();
        if let Some(k) = q.modifiers.order_by.iter().find(|k| !projected.contains(&k.var)) {
            return Err(QueryError::Unsupported(format!("ORDER BY on ?{}, which is not projected", k.var)));
        }
        Ok(q)
    }

    fn count(&mut self) -> R<u64> {
        match self.bump() {
            Some(Tok::Integer(n)) => n.parse().or_else(|_| self.err("count out of range")),
            _ => {
                self.i -= 1;
                self.err("expected non-negative integer")
            }
        }
    }

    fn group(&mut self) -> R<Pattern> {
        let (p, filters) = self.group_parts()?;
        Ok(match conjunction(filters) {
            Some(c) => Pattern::filter(p, c),
            None => p,
        })
    }

    /// Parses `{ ... }` returning the pattern without its top-level filters.
    fn group_parts(&mut self) -> R<(Pattern, Vec<Expr>)> {
        self.enter()?;
        self.expect_punct("{")?;
        if self.is_word("SELECT") {
            return Err(QueryError::Unsupported("sub-queries".into()));
        }
        let mut acc: Option<Pattern> = None;
        let mut filters = Vec::new();
        let join = |acc: Option<Pattern>, p: Pattern| match acc {
            None => p,
            Some(a) => Pattern::join(a, p),
        };
        loop {
            self.check_unsupported_word()?;
            if self.eat_punct("}") {
                break;
            }
            if self.eat_punct(".") {
                continue;
            }
            if self.eat_word("OPTIONAL") {
                let left = acc.take().unwrap_or_else(Pattern::unit);
                let (right, fs) = self.group_parts()?;
                acc = Some(match conjunction(fs) {
                    Some(c) => Pattern::optional_filter(left, right, c),
                    None => Pattern::optional(left, right),
                });
            } else if self.eat_word("MINUS") {
                let left = acc.take().unwrap_or_else(Pattern::unit);
                let right = self.group()?;
                acc = Some(Pattern::minus(left, right));
            } else if self.eat_word("GRAPH") {
                let name = match self.peek().cloned() {
                    Some(Tok::Var(v)) => {
                        self.i += 1;
                        TermPattern::Var(v)
                    }
                    _ => TermPattern::iri(self.expect_iri()?),
                };
                let inner = self.group()?;
                acc = Some(join(acc.take(), Pattern::graph(name, inner)));
            } else if self.eat_word("FILTER") {
                filters.push(self.constraint()?);
            } else if self.is_punct("{") {
                let mut p = self.group()?;
                while self.eat_word("UNION") {
                    let q = self.group()?;
                    p = Pattern::union(p, q);
                }
                acc = Some(join(acc.take(), p));
            } else if self.peek().is_none() {
                return self.err("unterminated group");
            } else {
                for t in self.triples_same_subject()? {
                    acc = Some(join(acc.take(), t));
                }
                if !self.eat_punct(".") && !self.is_punct("}") {
                    if self.is_word("FILTER") || self.is_word("OPTIONAL") || self.is_word("MINUS") || self.is_word("GRAPH") || self.is_punct("{") {
                        continue;
                    }
                    return self.err("expected '.' or '}'");
                }
            }
        }
        self.leave();
        Ok((acc.unwrap_or_else(Pattern::unit), filters))
    }

    fn var_or_term(&mut self, allow_literal: bool) -> R<TermPattern> {
        match self.peek().cloned() {
            Some(Tok::Var(v)) => {
                self.i += 1;
                Ok(TermPattern::Var(v))
            }
            Some(Tok::Blank(b)) => {
                self.i += 1;
                Ok(TermPattern::Var(format!("_:{b}")))
            }
            Some(Tok::Anon) => {
                self.i += 1;
                self.anon += 1;
                Ok(TermPattern::Var(format!("_:_anon{}", self.anon)))
            }
            Some(Tok::Iri(_)) | Some(Tok::PName(..)) => Ok(TermPattern::iri(self.expect_iri()?)),
            Some(Tok::Punct("[")) => Err(QueryError::Unsupported("blank node property lists".into())),
            Some(Tok::Punct("(")) => Err(QueryError::Unsupported("RDF collections".into())),
            _ if allow_literal => Ok(TermPattern::Term(self.literal()?)),
            _ => self.err("expected variable or term"),
        }
    }

    fn literal(&mut self) -> R<Term> {
        let negative = if self.eat_punct("-") {
            true
        } else {
            self.eat_punct("+");
            false
        };
        let sign = if negative { "-" } else { "" };
        match self.bump() {
            Some(Tok::Integer(n)) => Ok(Term::typed(format!("{sign}{n}"), XSD_INTEGER)),
            Some(Tok::Decimal(n)) => Ok(Term::typed(format!("{sign}{n}"), XSD_DECIMAL)),
            Some(Tok::Double(n)) => Ok(Term::typed(format!("{sign}{n}"), XSD_DOUBLE)),
            _ if negative => {
                self.i -= 1;
                self.err("expected number after sign")
            }
            Some(Tok::Str(s)) => match self.peek().cloned() {
                Some(Tok::LangTag(l)) => {
                    self.i += 1;
                    Ok(Term::Literal(Literal::lang(s, l)))
                }
                Some(Tok::DoubleCaret) => {
                    self.i += 1;
                    let dt = self.expect_iri()?;
                    Ok(Term::Literal(Literal::typed(s, dt)))
                }
                _ => Ok(Term::plain(s)),
            },
            Some(Tok::Word(w)) if w == "true" || w == "false" => Ok(Term::typed(w, XSD_BOOLEAN)),
            _ => {
                self.i -= 1;
                self.err("expected term")
            }
        }
    }

    fn triples_same_subject(&mut self) -> R<Vec<Pattern>> {
        let subject = self.var_or_term(true)?;
        let mut out = Vec::new();
        loop {
            let verb = self.verb()?;
            loop {
                let object = self.var_or_term(true)?;
                out.push(match &verb {
                    Verb::Term(p) => Pattern::triple(subject.clone(), p.clone(), object),
                    Verb::Path(path) => Pattern::path(subject.clone(), path.clone(), object),
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
            if !self.eat_punct(";") {
                break;
            }
            while self.eat_punct(";") {}
            if self.is_punct(".") || self.is_punct("}") {
                break;
            }
        }
        Ok(out)
    }

    fn verb(&mut self) -> R<Verb> {
        if let Some(Tok::Var(v)) = self.peek().cloned() {
            self.i += 1;
            return Ok(Verb::Term(TermPattern::Var(v)));
        }
        let path = self.path()?;
        Ok(match path.kind {
            PathKind::Link(iri) => Verb::Term(TermPattern::iri(iri)),
            _ => Verb::Path(path),
        })
    }

    fn path(&mut self) -> R<Path> {
        self.enter()?;
        let mut p = self.path_sequence()?;
        while self.eat_punct("|") {
            let q = self.path_sequence()?;
            p = Path::alternative(p, q);
        }
        self.leave();
        Ok(p)
    }

    fn path_sequence(&mut self) -> R<Path> {
        let mut p = self.path_elt_or_inverse()?;
        while self.eat_punct("/") {
            let q = self.path_elt_or_inverse()?;
            p = Path::sequence(p, q);
        }
        Ok(p)
    }

    fn path_elt_or_inverse(&mut self) -> R<Path> {
        if self.eat_punct("^") {
            let p = self.path_elt()?;
            return Ok(Path::inverse(p));
        }
        self.path_elt()
    }

    fn path_elt(&mut self) -> R<Path> {
        let p = self.path_primary()?;
        if self.eat_punct("?") {
            return Ok(Path::zero_or_one(p));
        }
        if self.eat_punct("*") {
            return Ok(Path::zero_or_more(p));
        }
        if self.eat_punct("+") {
            return Ok(Path::one_or_more(p));
        }
        if self.is_punct("{") && matches!(self.peek2(), Some(Tok::Integer(_)) | Some(Tok::Punct(","))) {
            return self.path_repeat(p);
        }
        Ok(p)
    }

    fn path_repeat(&mut self, p: Path) -> R<Path> {
        self.expect_punct("{")?;
        let lo = if let Some(Tok::Integer(_)) = self.peek() { Some(self.count()?) } else { None };
        let (lo, hi) = if self.eat_punct(",") {
            let hi = if let Some(Tok::Integer(_)) = self.peek() { Some(self.count()?) } else { None };
            (lo.unwrap_or(0), hi)
        } else {
            match lo {
                Some(n) => (n, Some(n)),
                None => return self.err("expected repetition bounds"),
            }
        };
        self.expect_punct("}")?;
        if hi.is_some_and(|h| h < lo) {
            return self.err("repetition upper bound below lower bound");
        }
        if lo > 32 || hi.is_some_and(|h| h > 32) {
            return Err(QueryError::Unsupported("path repetition bounds above 32".into()));
        }
        let seq = |parts: Vec<Path>| parts.into_iter().reduce(Path::sequence);
        let repeat = |n: u64, f: fn(Path) -> Path| (0..n).map(|_| f(p.clone())).collect::<Vec<_>>();
        let parts = match hi {
            None if lo == 0 => vec![Path::zero_or_more(p.clone())],
            None => {
                let mut v = repeat(lo - 1, |x| x);
                v.push(Path::one_or_more(p.clone()));
                v
            }
            Some(h) => {
                let mut v = repeat(lo, |x| x);
                v.extend(repeat(h - lo, Path::zero_or_one));
                v
            }
        };
        seq(parts).ok_or_else(|| QueryError::Unsupported("zero-length-only path repetition".into()))
    }

    fn path_primary(&mut self) -> R<Path> {
        if self.eat_word("a") {
            return Ok(Path::link(RDF_TYPE));
        }
        if self.eat_punct("(") {
            let p = self.path()?;
            self.expect_punct(")")?;
            return Ok(p);
        }
        if self.eat_punct("!") {
            let mut forward = Vec::new();
            let mut backward = Vec::new();
            if self.eat_punct("(") {
                loop {
                    self.negated_member(&mut forward, &mut backward)?;
                    if !self.eat_punct("|") {
                        break;
                    }
                }
                self.expect_punct(")")?;
            } else {
                self.negated_member(&mut forward, &mut backward)?;
            }
            return Ok(Path::negated(forward, backward));
        }
        match self.iri_token()? {
            Some(i) => Ok(Path::link(i)),
            None => self.err("expected property path"),
        }
    }

    fn negated_member(&mut self, forward: &mut Vec<String>, backward: &mut Vec<String>) -> R<()> {
        let inverse = self.eat_punct("^");
        let iri = if self.eat_word("a") { RDF_TYPE.to_string() } else { self.expect_iri()? };
        if inverse {
            backward.push(iri);
        } else {
            forward.push(iri);
        }
        Ok(())
    }

    fn constraint(&mut self) -> R<Expr> {
        if self.is_word("NOT") || self.is_word("EXISTS") {
            return Err(QueryError::Unsupported("FILTER EXISTS".into()));
        }
        if self.is_punct("(") {
            self.i += 1;
            let e = self.expr()?;
            self.expect_punct(")")?;
            return Ok(e);
        }
        match self.peek() {
            Some(Tok::Word(_)) => self.primary(),
            _ => self.err("expected filter constraint"),
        }
    }

    fn expr(&mut self) -> R<Expr> {
        self.enter()?;
        let mut e = self.and_expr()?;
        while self.eat_punct("||") {
            let r = self.and_expr()?;
            e = Expr::or(e, r);
        }
        self.leave();
        Ok(e)
    }

    fn and_expr(&mut self) -> R<Expr> {
        let mut e = self.relational()?;
        while self.eat_punct("&&") {
            let r = self.relational()?;
            e = Expr::and(e, r);
        }
        Ok(e)
    }

    fn relational(&mut self) -> R<Expr> {
        let a = self.unary()?;
        let op = match self.peek() {
            Some(Tok::Punct("=")) => CmpOp::Eq,
            Some(Tok::Punct("!=")) => CmpOp::Ne,
            Some(Tok::Punct("<")) => CmpOp::Lt,
            Some(Tok::Punct("<=")) => CmpOp::Le,
            Some(Tok::Punct(">")) => CmpOp::Gt,
            Some(Tok::Punct(">=")) => CmpOp::Ge,
            Some(Tok::Punct("+" | "-" | "*" | "/")) => return Err(QueryError::Unsupported("arithmetic expressions".into())),
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("IN") || w.eq_ignore_ascii_case("NOT") => {
                return Err(QueryError::Unsupported("IN expressions".into()))
            }
            _ => return Ok(a),
        };
        self.i += 1;
        let b = self.unary()?;
        if matches!(self.peek(), Some(Tok::Punct("+" | "-" | "*" | "/"))) {
            return Err(QueryError::Unsupported("arithmetic expressions".into()));
        }
        Ok(Expr::cmp(op, a, b))
    }

    fn unary(&mut self) -> R<Expr> {
        if self.eat_punct("!") {
            self.enter()?;
            let e = self.unary()?;
            self.leave();
            return Ok(Expr::not(e));
        }
        if self.is_punct("-") || self.is_punct("+") {
            return match self.peek2() {
                Some(Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_)) => Ok(Expr::Const(self.literal()?)),
                _ => Err(QueryError::Unsupported("arithmetic expressions".into())),
            };
        }
        self.primary()
    }

    fn primary(&mut self) -> R<Expr> {
        match self.peek().cloned() {
            Some(Tok::Punct("(")) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Some(Tok::Var(v)) => {
                self.i += 1;
                Ok(Expr::Var(v))
            }
            Some(Tok::Iri(_)) | Some(Tok::PName(..)) => {
                let iri = self.expect_iri()?;
                if self.is_punct("(") {
                    return Err(QueryError::Unsupported("function calls".into()));
                }
                Ok(Expr::Const(Term::iri(iri)))
            }
            Some(Tok::Word(w)) if w == "true" || w == "false" => Ok(Expr::Const(self.literal()?)),
            Some(Tok::Word(w)) if w.eq_ignore_ascii_case("UNDEF") => {
                self.i += 1;
                Ok(Expr::Const(Term::Unbound))
            }
            Some(Tok::Word(w)) => {
                let upper = w.to_ascii_uppercase();
                let test = match upper.as_str() {
                    "BOUND" => None,
                    "ISIRI" | "ISURI" => Some(TypeTest::IsIri),
                    "ISBLANK" => Some(TypeTest::IsBlank),
                    "ISLITERAL" => Some(TypeTest::IsLiteral),
                    "ISNUMERIC" => Some(TypeTest::IsNumeric),
                    "REGEX" => return self.regex(),
                    _ if UNSUPPORTED_FUNCTIONS.contains(&upper.as_str()) => return Err(QueryError::Unsupported(upper)),
                    _ => return self.err(format!("unknown function '{w}'")),
                };
                self.i += 1;
                self.expect_punct("(")?;
                let arg = self.expr()?;
                self.expect_punct(")")?;
                match test {
                    None => match arg {
                        Expr::Var(_) | Expr::Const(Term::Unbound) => Ok(Expr::Bound(Box::new(arg))),
                        _ => self.err("BOUND expects a variable"),
                    },
                    Some(t) => Ok(Expr::test(t, arg)),
                }
            }
            Some(Tok::Str(_) | Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_)) => Ok(Expr::Const(self.literal()?)),
            _ => self.err("expected expression"),
        }
    }

    fn regex(&mut self) -> R<Expr> {
        self.i += 1;
        self.expect_punct("(")?;
        let target = self.expr()?;
        self.expect_punct(",")?;
        let pattern = match self.bump() {
            Some(Tok::Str(s)) => s,
            _ => {
                self.i -= 1;
                return Err(QueryError::Unsupported("non-constant regex pattern".into()));
            }
        };
        let flags = if self.eat_punct(",") {
            match self.bump() {
                Some(Tok::Str(s)) => s,
                _ => {
                    self.i -= 1;
                    return Err(QueryError::Unsupported("non-constant regex flags".into()));
                }
            }
        } else {
            String::new()
        };
        self.expect_punct(")")?;
        Ok(Expr::regex(target, pattern, flags))
    }
}

enum Verb {
    Term(TermPattern),
    Path(Path),
}

fn conjunction(filters: Vec<Expr>) -> Option<Expr> {
    filters.into_iter().reduce(Expr::and)
}

/// Parses a query, expands prefixes, and assigns pattern indices.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let mut p = Parser::new(text)?;
    let q = p.query()?;
    if q.pattern.depth() > MAX_TREE_DEPTH {
        return Err(QueryError::Unsupported(format!("pattern trees deeper than {MAX_TREE_DEPTH} levels")));
    }
    Ok(index_patterns(q))
}

/// Parses a standalone filter expression (no prefixes in scope).
pub fn parse_expression(text: &str) -> Result<Expr, QueryError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}
