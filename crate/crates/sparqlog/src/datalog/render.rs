use std::fmt::Write as _;

use super::{Atom, Builtin, DTerm, DatalogError, Goal, GoalKind, Program, Rule};
use crate::rdf::{Cursor, Term};
use crate::sparql::{parse_expression, Modifiers, OrderKey};

/// Renders a program as text: one rule per line followed by the goal
/// descriptor as `%` comment lines. The output is accepted by
/// [`parse_program`].
pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    for r in &p.rules {
        let _ = writeln!(out, "{r}");
    }
    match &p.goal {
        None => out.push_str("% @goal none\n"),
        Some(g) => {
            let _ = write!(out, "% @goal {}", g.predicate);
            match &g.kind {
                GoalKind::Select { projection } => {
                    out.push_str(" select");
                    if g.has_id {
                        out.push_str(" id");
                    }
                    if g.has_graph {
                        out.push_str(" graph");
                    }
                    let _ = write!(out, " columns={} projection={}", g.columns.join(","), projection.join(","));
                }
                GoalKind::Ask => out.push_str(" ask"),
            }
            out.push('\n');
            let m = &g.modifiers;
            if *m != Modifiers::default() {
                out.push_str("% @modifiers");
                if m.distinct {
                    out.push_str(" distinct");
                }
                if !m.order_by.is_empty() {
                    let keys: Vec<String> =
                        m.order_by.iter().map(|k| format!("{}{}", if k.descending { '-' } else { '+' }, k.var)).collect();
                    let _ = write!(out, " order={}", keys.join(","));
                }
                if let Some(l) = m.limit {
                    let _ = write!(out, " limit={l}");
                }
                if let Some(o) = m.offset {
                    let _ = write!(out, " offset={o}");
                }
                out.push('\n');
            }
        }
    }
    out
}

struct Loader<'a> {
    cur: Cursor<'a>,
    src: &'a str,
}

type R<T> = Result<T, DatalogError>;

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl<'a> Loader<'a> {
    fn err<T>(&self, message: impl Into<String>) -> R<T> {
        let line = self.src[..self.cur.pos()].matches('\n').count() + 1;
        Err(DatalogError::Parse { line, message: message.into() })
    }

    fn lift<T>(&self, r: Result<T, String>) -> R<T> {
        match r {
            Ok(v) => Ok(v),
            Err(m) => self.err(m),
        }
    }

    /// Skips whitespace and `%` comments, collecting directive comments.
    fn skip(&mut self, directives: &mut Vec<(usize, String)>) {
        loop {
            self.cur.skip_ws();
            if self.cur.peek() == Some('%') {
                let start = self.cur.pos();
                while let Some(c) = self.cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.cur.bump();
                }
                let text = self.src[start + 1..self.cur.pos()].trim();
                if text.starts_with('@') {
                    let line = self.src[..start].matches('\n').count() + 1;
                    directives.push((line, text.to_string()));
                }
            } else {
                return;
            }
        }
    }

    fn ws(&mut self) {
        let mut ignored = vec![];
        self.skip(&mut ignored);
    }

    fn ident(&mut self) -> R<String> {
        let rest = self.cur.rest();
        let len: usize = match rest.chars().next() {
            Some(c) if is_ident_start(c) => rest.char_indices().find(|&(_, c)| !is_ident(c)).map_or(rest.len(), |(i, _)| i),
            _ => return self.err("expected an identifier"),
        };
        for _ in rest[..len].chars() {
            self.cur.bump();
        }
        Ok(rest[..len].to_string())
    }

    fn expect(&mut self, c: char) -> R<()> {
        self.ws();
        if self.cur.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn dterm(&mut self) -> R<DTerm> {
        self.ws();
        match self.cur.peek() {
            Some('[') => {
                self.cur.bump();
                self.ws();
                if self.cur.eat(']') {
                    return Ok(DTerm::nil());
                }
                let tag = {
                    let r = self.cur.quoted();
                    self.lift(r)?
                };
                let mut args = vec![];
                loop {
                    self.ws();
                    if self.cur.eat(']') {
                        break;
                    }
                    self.expect(',')?;
                    args.push(self.dterm()?);
                }
                Ok(DTerm::skolem(tag, args))
            }
            Some('<') | Some('"') => {
                let r = self.cur.term();
                Ok(DTerm::term(self.lift(r)?))
            }
            Some('_') if self.cur.rest().starts_with("_:") => {
                let r = self.cur.term();
                Ok(DTerm::term(self.lift(r)?))
            }
            Some(c) if is_ident_start(c) => {
                let name = self.ident()?;
                Ok(match name.as_str() {
                    "null" => DTerm::term(Term::Unbound),
                    "true" => DTerm::term(Term::boolean(true)),
                    "false" => DTerm::term(Term::boolean(false)),
                    _ => DTerm::Var(name),
                })
            }
            _ => self.err("expected a term"),
        }
    }

    fn atom_args(&mut self) -> R<Vec<DTerm>> {
        self.expect('(')?;
        let mut args = vec![];
        self.ws();
        if self.cur.eat(')') {
            return Ok(args);
        }
        loop {
            args.push(self.dterm()?);
            self.ws();
            if self.cur.eat(')') {
                return Ok(args);
            }
            self.expect(',')?;
        }
    }

    /// Raw text of a balanced parenthesised filter expression.
    fn filter_text(&mut self) -> R<String> {
        self.expect('(')?;
        let start = self.cur.pos();
        let mut depth = 1usize;
        let mut prev_space = true;
        loop {
            let c = match self.cur.peek() {
                Some(c) => c,
                None => return self.err("unterminated filter"),
            };
            match c {
                '"' | '\'' => {
                    self.cur.bump();
                    while let Some(d) = self.cur.bump() {
                        if d == '\\' {
                            self.cur.bump();
                        } else if d == c {
                            break;
                        }
                    }
                }
                '<' if !prev_space => {
                    self.cur.bump();
                }
                '<' => {
                    let rest = self.cur.rest();
                    let is_iri = rest[1..].chars().next().is_some_and(|n| !n.is_whitespace() && n != '=')
                        && rest[1..].find('>').is_some_and(|e| !rest[1..1 + e].contains(char::is_whitespace));
                    if is_iri {
                        let r = self.cur.iri();
                        self.lift(r)?;
                    } else {
                        self.cur.bump();
                    }
                }
                '(' => {
                    depth += 1;
                    self.cur.bump();
                }
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        let text = self.src[start..self.cur.pos()].to_string();
                        self.cur.bump();
                        return Ok(text);
                    }
                    self.cur.bump();
                }
                _ => {
                    self.cur.bump();
                }
            }
            prev_space = c.is_whitespace() || c == '(' || c == ',';
        }
    }

    fn literal(&mut self, rule: &mut Rule) -> R<()> {
        self.ws();
        let save = self.cur.pos();
        if self.cur.peek().is_some_and(is_ident_start) {
            let name = self.ident()?;
            self.ws();
            if name == "not" && self.cur.peek().is_some_and(is_ident_start) {
                let pred = self.ident()?;
                let args = self.atom_args()?;
                rule.negative.push(Atom::new(pred, args));
                return Ok(());
            }
            if self.cur.peek() == Some('(') {
                if name == "filter" {
                    let text = self.filter_text()?;
                    match parse_expression(&text) {
                        Ok(e) => rule.builtins.push(Builtin::Filter(e)),
                        Err(e) => return self.err(format!("bad filter: {e}")),
                    }
                } else {
                    let args = self.atom_args()?;
                    rule.positive.push(Atom::new(name, args));
                }
                return Ok(());
            }
            self.cur.set_pos(save);
        }
        let lhs = self.dterm()?;
        self.ws();
        let ne = if self.cur.rest().starts_with("!=") {
            self.cur.bump();
            self.cur.bump();
            true
        } else if self.cur.eat('=') {
            false
        } else {
            return self.err("expected an atom or a comparison");
        };
        let rhs = self.dterm()?;
        rule.builtins.push(if ne { Builtin::Ne(lhs, rhs) } else { Builtin::Eq(lhs, rhs) });
        Ok(())
    }

    fn rule(&mut self) -> R<Rule> {
        let pred = self.ident()?;
        let args = self.atom_args()?;
        let mut rule = Rule::fact(Atom::new(pred, args));
        self.ws();
        if self.cur.rest().starts_with(":-") {
            self.cur.bump();
            self.cur.bump();
            loop {
                self.literal(&mut rule)?;
                self.ws();
                if self.cur.eat(',') {
                    continue;
                }
                break;
            }
        }
        self.expect('.')?;
        Ok(rule)
    }
}

fn parse_list(s: &str) -> Vec<String> {
    s.split(',').filter(|x| !x.is_empty()).map(str::to_string).collect()
}

fn parse_goal(line: usize, text: &str) -> R<Option<Goal>> {
    let bad = |m: &str| Err(DatalogError::Parse { line, message: m.to_string() });
    let mut words = text.split_whitespace().skip(1);
    let predicate = match words.next() {
        Some("none") => return Ok(None),
        Some(p) => p.to_string(),
        None => return bad("goal without a predicate"),
    };
    let mut goal = Goal {
        predicate,
        kind: GoalKind::Ask,
        columns: vec![],
        has_id: false,
        has_graph: false,
        modifiers: Modifiers::default(),
    };
    match words.next() {
        Some("ask") => {}
        Some("select") => {
            let mut projection = vec![];
            for w in words {
                match w {
                    "id" => goal.has_id = true,
                    "graph" => goal.has_graph = true,
                    _ => match w.split_once('=') {
                        Some(("columns", v)) => goal.columns = parse_list(v),
                        Some(("projection", v)) => projection = parse_list(v),
                        _ => return bad("unknown goal attribute"),
                    },
                }
            }
            goal.kind = GoalKind::Select { projection };
        }
        _ => return bad("goal kind must be select or ask"),
    }
    Ok(Some(goal))
}

fn parse_modifiers(line: usize, text: &str) -> R<Modifiers> {
    let bad = |m: &str| Err(DatalogError::Parse { line, message: m.to_string() });
    let mut m = Modifiers::default();
    for w in text.split_whitespace().skip(1) {
        if w == "distinct" {
            m.distinct = true;
            continue;
        }
        match w.split_once('=') {
            Some(("order", v)) => {
                for k in v.split(',').filter(|k| !k.is_empty()) {
                    let (descending, var) = match k.split_at(1) {
                        ("+", v) => (false, v),
                        ("-", v) => (true, v),
                        _ => return bad("order keys start with + or -"),
                    };
                    m.order_by.push(OrderKey { var: var.to_string(), descending });
                }
            }
            Some(("limit", v)) => match v.parse() {
                Ok(n) => m.limit = Some(n),
                Err(_) => return bad("bad limit"),
            },
            Some(("offset", v)) => match v.parse() {
                Ok(n) => m.offset = Some(n),
                Err(_) => return bad("bad offset"),
            },
            _ => return bad("unknown modifier"),
        }
    }
    Ok(m)
}

/// Parses the textual program format produced by [`render_program`].
pub fn parse_program(text: &str) -> Result<Program, DatalogError> {
    let mut l = Loader { cur: Cursor::new(text), src: text };
    let mut directives = vec![];
    let mut rules = vec![];
    loop {
        l.skip(&mut directives);
        if l.cur.at_end() {
            break;
        }
        rules.push(l.rule()?);
    }
    let mut program = Program::new(rules);
    let mut modifiers = None;
    for (line, d) in directives {
        if d.starts_with("@goal") {
            program.goal = parse_goal(line, &d)?;
        } else if d.starts_with("@modifiers") {
            modifiers = Some(parse_modifiers(line, &d)?);
        }
    }
    if let (Some(g), Some(m)) = (program.goal.as_mut(), modifiers) {
        g.modifiers = m;
    }
    program.arities()?;
    Ok(program)
}
