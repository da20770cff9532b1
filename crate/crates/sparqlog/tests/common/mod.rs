//! Shared helpers for the integration suites: seeded generators for
//! datasets, queries and programs, the engine-versus-oracle check, and a
//! structural comparator for translated programs.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparqlog::datalog::{
    audit_recursion, check_warded, stratify, Atom, Builtin, DTerm, DatalogError, EvalOptions, Goal, Program, Rule,
    Value,
};
use sparqlog::oracle::{compare_multisets, CompareReport};
use sparqlog::rdf::{Dataset, Term, Triple};
use sparqlog::sparql::{CmpOp, Expr, Path, PathKind, Pattern, PatternKind, Projection, Query, QueryForm, TermPattern, TypeTest};
use sparqlog::translator::translate_query;
use sparqlog::{run_query, run_query_direct, Answer};

pub const EX: &str = "http://ex.org/";

pub fn ex(local: &str) -> Term {
    Term::iri(format!("{EX}{local}"))
}

pub fn triple(s: Term, p: &str, o: Term) -> Triple {
    Triple::new(s, ex(p), o).unwrap()
}

pub const FAMILIES: [&str; 8] = ["triple", "join", "union", "optional", "filter", "optional-filter", "minus", "graph"];

const NODES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
const PREDICATES: [&str; 3] = ["p", "q", "r"];
const VARS: [&str; 4] = ["x", "y", "z", "w"];

pub struct Gen {
    rng: ChaCha8Rng,
    /// Allow GRAPH patterns below the root.
    graphs: bool,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), graphs: false }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).unwrap().clone()
    }

    pub fn node(&mut self) -> Term {
        if self.chance(0.15) {
            Term::blank(format!("b{}", self.below(2)))
        } else {
            ex(self.pick(&NODES))
        }
    }

    pub fn object(&mut self) -> Term {
        match self.below(10) {
            0 => Term::integer(self.below(3) as i64),
            1 => Term::lang_literal("x", "en"),
            2 => Term::plain(self.pick(&["x", "y"])),
            _ => self.node(),
        }
    }

    pub fn triples(&mut self, max: usize) -> Vec<Triple> {
        let n = self.below(max + 1);
        (0..n)
            .map(|_| {
                let s = self.node();
                let p = self.pick(&PREDICATES);
                let o = self.object();
                triple(s, p, o)
            })
            .collect()
    }

    /// A dataset of at most 40 triples; with `named`, some of them sit in
    /// the named graphs `ex:g1` and `ex:g2`.
    pub fn dataset(&mut self, named: bool) -> Dataset {
        if !named {
            return Dataset::from_triples(self.triples(40));
        }
        let d = self.triples(16);
        let g1 = self.triples(12);
        let g2 = self.triples(12);
        Dataset::from_triples(d).with_named(format!("{EX}g1"), g1).with_named(format!("{EX}g2"), g2)
    }

    pub fn var(&mut self) -> String {
        if self.chance(0.03) {
            return "D".into();
        }
        self.pick(&VARS).to_string()
    }

    /// A constant that query syntax can express: no blank nodes.
    fn constant(&mut self, object: bool) -> Term {
        loop {
            let t = if object { self.object() } else { self.node() };
            if !t.is_blank() {
                return t;
            }
        }
    }

    /// A subject or object position: a variable, a blank node (which acts
    /// as a hidden variable) or a constant.
    fn slot(&mut self, object: bool) -> TermPattern {
        match self.below(20) {
            0 => TermPattern::var(format!("_:b{}", self.below(2))),
            1..=13 => TermPattern::var(self.var()),
            _ => TermPattern::Term(self.constant(object)),
        }
    }

    pub fn triple_pattern(&mut self) -> Pattern {
        let s = self.slot(false);
        let p = if self.chance(0.9) { TermPattern::Term(ex(self.pick(&PREDICATES))) } else { TermPattern::var(self.var()) };
        let o = self.slot(true);
        Pattern::triple(s, p, o)
    }

    pub fn path(&mut self, depth: usize) -> Path {
        if depth <= 1 {
            return if self.chance(0.85) { Path::link(format!("{EX}{}", self.pick(&PREDICATES))) } else { self.negated() };
        }
        let d = depth - 1;
        match self.below(8) {
            0 => Path::inverse(self.path(d)),
            1 => Path::alternative(self.path(d), self.path(d)),
            2 => Path::sequence(self.path(d), self.path(d)),
            3 => Path::zero_or_one(self.path(d)),
            4 => Path::one_or_more(self.path(d)),
            5 => Path::zero_or_more(self.path(d)),
            6 => self.negated(),
            _ => Path::link(format!("{EX}{}", self.pick(&PREDICATES))),
        }
    }

    pub fn negated(&mut self) -> Path {
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for p in PREDICATES {
            match self.below(3) {
                0 => forward.push(format!("{EX}{p}")),
                1 => backward.push(format!("{EX}{p}")),
                _ => {}
            }
        }
        if forward.is_empty() && backward.is_empty() {
            forward.push(format!("{EX}p"));
        }
        Path::negated(forward, backward)
    }

    /// A leaf pattern; a path pattern counts its path towards `depth`.
    fn leaf(&mut self, depth: usize) -> Pattern {
        match self.below(20) {
            0 => Pattern::unit(),
            1 | 2 if depth > 1 => {
                let path = self.path(depth.min(3) - 1);
                let s = self.slot(false);
                let o = self.slot(false);
                match path.kind {
                    PathKind::Link(iri) => Pattern::triple(s, TermPattern::Term(Term::iri(iri)), o),
                    _ => Pattern::path(s, path, o),
                }
            }
            _ => self.triple_pattern(),
        }
    }

    fn any_var(&mut self, scope: &BTreeSet<String>) -> String {
        let scope: Vec<String> = scope.iter().filter(|v| !v.starts_with("_:")).cloned().collect();
        if scope.is_empty() || self.chance(0.1) {
            self.var()
        } else {
            self.pick(&scope)
        }
    }

    fn atom_expr(&mut self, scope: &BTreeSet<String>) -> Expr {
        let v = Expr::var(self.any_var(scope));
        match self.below(9) {
            0 => Expr::bound(self.any_var(scope)),
            1 => Expr::test(self.pick(&[TypeTest::IsIri, TypeTest::IsBlank, TypeTest::IsLiteral, TypeTest::IsNumeric]), v),
            2 => Expr::regex(v, self.pick(&["x", "^X", "b"]), self.pick(&["", "i"])),
            3 => Expr::cmp(self.pick(&[CmpOp::Eq, CmpOp::Ne]), v, Expr::var(self.any_var(scope))),
            4 => Expr::cmp(self.pick(&[CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]), v, Expr::constant(Term::integer(1))),
            _ => Expr::cmp(self.pick(&[CmpOp::Eq, CmpOp::Eq, CmpOp::Ne]), v, Expr::constant(self.constant(true))),
        }
    }

    pub fn filter(&mut self, scope: &BTreeSet<String>) -> Expr {
        match self.below(6) {
            0 => Expr::and(self.atom_expr(scope), self.atom_expr(scope)),
            1 => Expr::or(self.atom_expr(scope), self.atom_expr(scope)),
            2 => Expr::not(self.atom_expr(scope)),
            _ => self.atom_expr(scope),
        }
    }

    fn graph_name(&mut self) -> TermPattern {
        match self.below(6) {
            0 => TermPattern::Term(ex("g1")),
            1 => TermPattern::Term(ex("g3")),
            2 => TermPattern::var("g"),
            _ => TermPattern::var(self.var()),
        }
    }

    /// A random pattern of depth at most `depth`.
    pub fn pattern(&mut self, depth: usize) -> Pattern {
        if depth <= 1 || self.chance(0.3) {
            return self.leaf(depth);
        }
        let kinds = if self.graphs { 8 } else { 7 };
        let kind = self.below(kinds);
        self.operator(kind, depth)
    }

    fn operator(&mut self, kind: usize, depth: usize) -> Pattern {
        let d = depth - 1;
        match kind {
            0 => Pattern::join(self.pattern(d), self.pattern(d)),
            1 => Pattern::union(self.pattern(d), self.pattern(d)),
            2 => Pattern::optional(self.pattern(d), self.pattern(d)),
            3 => {
                let a = self.pattern(d);
                let c = self.filter(&a.vars());
                Pattern::filter(a, c)
            }
            4 => {
                let a = self.pattern(d);
                let b = self.pattern(d);
                let scope = a.vars().union(&b.vars()).cloned().collect();
                let c = self.filter(&scope);
                Pattern::optional_filter(a, b, c)
            }
            5 => Pattern::minus(self.pattern(d), self.pattern(d)),
            6 => self.triple_pattern(),
            _ => {
                let g = self.graph_name();
                Pattern::graph(g, self.pattern(d))
            }
        }
    }

    /// A pattern of depth at most 4 whose root belongs to `family`.
    pub fn family_pattern(&mut self, family: &str) -> Pattern {
        self.graphs = family == "graph";
        let kind = match family {
            "triple" => return self.triple_pattern(),
            "join" => 0,
            "union" => 1,
            "optional" => 2,
            "filter" => 3,
            "optional-filter" => 4,
            "minus" => 5,
            "graph" => 7,
            other => panic!("unknown family {other}"),
        };
        self.operator(kind, 4)
    }

    pub fn select(&mut self, pattern: Pattern, distinct: bool) -> Query {
        let mut q = Query::select(&[], pattern);
        q.form = if self.chance(0.5) {
            QueryForm::Select(Projection::All)
        } else {
            let mut pool: Vec<String> = q.pattern.vars().into_iter().filter(|v| !v.starts_with("_:")).collect();
            pool.push(self.var());
            pool.shuffle(&mut self.rng);
            let n = 1 + self.below(pool.len());
            QueryForm::Select(Projection::Vars(pool.into_iter().take(n).collect()))
        };
        q.distinct(distinct)
    }

    pub fn family_query(&mut self, family: &str, distinct: bool) -> Query {
        let p = self.family_pattern(family);
        self.select(p, distinct)
    }

    /// A negation-free program of at most six rules over the constants
    /// `a`..`d`, with at most 15 facts written as fact rules.
    pub fn program(&mut self) -> Program {
        const EDB: [(&str, usize); 2] = [("e", 2), ("u", 1)];
        const IDB: [(&str, usize); 3] = [("s", 2), ("t", 1), ("v", 2)];
        let constant = |g: &mut Gen| Term::iri(format!("{EX}{}", g.pick(&["a", "b", "c", "d"])));
        let mut facts = BTreeSet::new();
        for _ in 0..self.below(16) {
            let (pred, arity) = self.pick(&EDB);
            let args: Vec<DTerm> = (0..arity).map(|_| DTerm::term(constant(self))).collect();
            facts.insert(Rule::fact(Atom::new(pred, args)));
        }
        let mut rules: Vec<Rule> = facts.into_iter().collect();
        let all: Vec<(&str, usize)> = EDB.iter().chain(IDB.iter()).copied().collect();
        for _ in 0..1 + self.below(6) {
            let mut body = Vec::new();
            let mut vars = BTreeSet::new();
            for _ in 0..1 + self.below(3) {
                let (pred, arity) = self.pick(&all);
                let args: Vec<DTerm> = (0..arity)
                    .map(|_| {
                        if self.chance(0.15) {
                            DTerm::term(constant(self))
                        } else {
                            let v = self.pick(&["X", "Y", "Z"]).to_string();
                            vars.insert(v.clone());
                            DTerm::var(v)
                        }
                    })
                    .collect();
                body.push(Atom::new(pred, args));
            }
            let (head, arity) = self.pick(&IDB);
            let vars: Vec<String> = vars.into_iter().collect();
            let args: Vec<DTerm> = (0..arity)
                .map(|_| {
                    if vars.is_empty() || self.chance(0.1) {
                        DTerm::term(constant(self))
                    } else {
                        DTerm::var(self.pick(&vars))
                    }
                })
                .collect();
            rules.push(Rule::new(Atom::new(head, args), body));
        }
        Program::new(rules)
    }
}

/// Result of comparing the rule engine with the direct evaluator.
pub enum Outcome {
    /// Both agree; carries the number of solutions and whether any of them
    /// occurs more than once.
    Equal(u64, bool),
    Different(String),
}

/// Evaluates `q` with both the rule engine and the direct evaluator and
/// compares the solution multisets, ignoring blank node labels.
pub fn engine_vs_oracle(q: &Query, d: &Dataset) -> Outcome {
    let opts = EvalOptions { max_derivations: 2_000_000, ..EvalOptions::default() };
    let got = match run_query(q, d, &opts) {
        Ok(a) => a,
        Err(e) => return Outcome::Different(format!("engine failed: {e}")),
    };
    match (run_query_direct(q, d), got) {
        (Answer::Boolean(e), Answer::Boolean(g)) if e == g => Outcome::Equal(u64::from(e), false),
        (Answer::Solutions { multiset: e, .. }, Answer::Solutions { multiset: g, .. }) => {
            let report: CompareReport = compare_multisets(&e, &g, true);
            if report.equal && report.correct_ratio == 1.0 && report.complete_ratio == 1.0 {
                Outcome::Equal(g.len(), g.iter().any(|(_, c)| c > 1))
            } else {
                Outcome::Different(report.diff.join("\n"))
            }
        }
        (e, g) => Outcome::Different(format!("expected {e:?}, got {g:?}")),
    }
}

/// Checks the static guarantees of a translated program.
pub fn static_checks(p: &Program) -> Result<(), String> {
    stratify(p).map_err(|e| e.to_string())?;
    let w = check_warded(p);
    if !w.is_warded {
        return Err(format!("not warded: {}", w.witness.map(|r| p.rules[r].to_string()).unwrap_or_default()));
    }
    let audit = audit_recursion(p);
    if !audit.passed() {
        return Err(format!("recursion audit: {}", audit.violations[0]));
    }
    Ok(())
}

pub fn translate(q: &Query) -> Program {
    translate_query(q).unwrap_or_else(|e| panic!("translation failed: {e}\n{q}"))
}

pub fn is_resource_limit(e: &DatalogError) -> bool {
    matches!(e, DatalogError::ResourceLimit(_))
}

// Structural comparison of programs.

const AUXILIARY: [&str; 4] = ["null", "comp", "term", "subjectOrObject"];
const FIXED: [&str; 8] = ["triple", "named", "null", "comp", "term", "subjectOrObject", "ans", "ans_ask"];

/// Drops the auxiliary rules shared by every translation.
pub fn core_rules(p: &Program) -> Vec<Rule> {
    p.rules.iter().filter(|r| !AUXILIARY.contains(&r.head.predicate.as_str())).cloned().collect()
}

#[derive(Clone, Default)]
struct Bijection {
    forward: BTreeMap<String, String>,
    backward: BTreeMap<String, String>,
}

impl Bijection {
    fn bind(&mut self, a: &str, b: &str) -> bool {
        match (self.forward.get(a), self.backward.get(b)) {
            (Some(x), Some(y)) => x == b && y == a,
            (None, None) => {
                self.forward.insert(a.into(), b.into());
                self.backward.insert(b.into(), a.into());
                true
            }
            _ => false,
        }
    }
}

#[derive(Clone)]
struct State {
    preds: Bijection,
    vars: Bijection,
}

fn is_skolem(t: &DTerm) -> bool {
    matches!(t, DTerm::Skolem { .. } | DTerm::Const(Value::Skolem(_)))
}

fn match_term(a: &DTerm, b: &DTerm, s: &mut State) -> bool {
    match (a, b) {
        (DTerm::Var(x), DTerm::Var(y)) => s.vars.bind(x, y),
        _ if is_skolem(a) || is_skolem(b) => is_skolem(a) && is_skolem(b),
        (DTerm::Const(x), DTerm::Const(y)) => x == y,
        _ => false,
    }
}

fn match_atom(a: &Atom, b: &Atom, s: &mut State) -> bool {
    let fixed = FIXED.contains(&a.predicate.as_str()) || FIXED.contains(&b.predicate.as_str());
    let preds_ok = if fixed { a.predicate == b.predicate } else { s.preds.bind(&a.predicate, &b.predicate) };
    preds_ok && a.args.len() == b.args.len() && a.args.iter().zip(&b.args).all(|(x, y)| match_term(x, y, s))
}

fn rename_expr(e: &Expr, s: &State) -> Option<String> {
    let mut ok = true;
    let renamed = e.substitute(&mut |v| match s.vars.forward.get(v) {
        Some(w) => Expr::var(w.clone()),
        None => {
            ok = false;
            Expr::var(v)
        }
    });
    ok.then(|| renamed.to_string())
}

fn match_builtin(a: &Builtin, b: &Builtin, s: &mut State) -> bool {
    match (a, b) {
        (Builtin::Eq(a1, a2), Builtin::Eq(b1, b2)) | (Builtin::Ne(a1, a2), Builtin::Ne(b1, b2)) => {
            let mut straight = s.clone();
            if match_term(a1, b1, &mut straight) && match_term(a2, b2, &mut straight) {
                *s = straight;
                return true;
            }
            let mut swapped = s.clone();
            if match_term(a1, b2, &mut swapped) && match_term(a2, b1, &mut swapped) {
                *s = swapped;
                return true;
            }
            false
        }
        (Builtin::Filter(x), Builtin::Filter(y)) => rename_expr(x, s).is_some_and(|t| t == y.to_string()),
        _ => false,
    }
}

/// Matches the items of `a` against a permutation of `b`, calling `k` on
/// every complete matching until it succeeds.
fn permute<T>(
    a: &[T],
    b: &[T],
    used: &mut Vec<bool>,
    s: &State,
    m: &impl Fn(&T, &T, &mut State) -> bool,
    k: &mut dyn FnMut(&State) -> bool,
) -> bool {
    let Some((first, rest)) = a.split_first() else { return k(s) };
    for j in 0..b.len() {
        if used[j] {
            continue;
        }
        let mut next = s.clone();
        if m(first, &b[j], &mut next) {
            used[j] = true;
            let found = permute(rest, b, used, &next, m, k);
            used[j] = false;
            if found {
                return true;
            }
        }
    }
    false
}

fn match_rule(a: &Rule, b: &Rule, s: &State, k: &mut dyn FnMut(&State) -> bool) -> bool {
    if a.positive.len() != b.positive.len() || a.negative.len() != b.negative.len() || a.builtins.len() != b.builtins.len()
    {
        return false;
    }
    let mut start = State { preds: s.preds.clone(), vars: Bijection::default() };
    if !match_atom(&a.head, &b.head, &mut start) {
        return false;
    }
    permute(&a.positive, &b.positive, &mut vec![false; b.positive.len()], &start, &match_atom, &mut |s1| {
        permute(&a.negative, &b.negative, &mut vec![false; b.negative.len()], s1, &match_atom, &mut |s2| {
            permute(&a.builtins, &b.builtins, &mut vec![false; b.builtins.len()], s2, &match_builtin, &mut |s3| {
                k(s3)
            })
        })
    })
}

fn match_rules(a: &[Rule], b: &[Rule], used: &mut Vec<bool>, preds: &Bijection, out: &mut Option<Bijection>) -> bool {
    let Some((first, rest)) = a.split_first() else {
        *out = Some(preds.clone());
        return true;
    };
    for j in 0..b.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        let state = State { preds: preds.clone(), vars: Bijection::default() };
        let found = match_rule(first, &b[j], &state, &mut |s| match_rules(rest, b, used, &s.preds, out));
        used[j] = false;
        if found {
            return true;
        }
    }
    false
}

fn goals_agree(a: &Goal, b: &Goal) -> bool {
    a.predicate == b.predicate
        && a.kind == b.kind
        && a.columns == b.columns
        && a.has_id == b.has_id
        && a.has_graph == b.has_graph
        && a.modifiers == b.modifiers
}

/// Decides whether two programs agree up to renaming of predicates and
/// variables, the order of rules and body literals, and the tags and
/// arguments of identifier terms. Auxiliary rules are ignored. Returns the
/// predicate renaming from `expected` to `got`.
pub fn isomorphic(expected: &Program, got: &Program) -> Option<BTreeMap<String, String>> {
    match (&expected.goal, &got.goal) {
        (Some(a), Some(b)) if goals_agree(a, b) => {}
        (None, None) => {}
        _ => return None,
    }
    let a = core_rules(expected);
    let b = core_rules(got);
    if a.len() != b.len() {
        return None;
    }
    let mut out = None;
    match_rules(&a, &b, &mut vec![false; b.len()], &Bijection::default(), &mut out);
    out.map(|m| m.forward)
}

/// Tuples of `pred` from a derived relation, with the leading identifier
/// dropped, mapped to the number of distinct identifiers.
pub fn id_counts(tuples: Vec<Vec<Value>>) -> BTreeMap<Vec<Value>, u128> {
    let mut ids: BTreeMap<Vec<Value>, BTreeSet<Value>> = BTreeMap::new();
    for mut t in tuples {
        let id = t.remove(0);
        ids.entry(t).or_default().insert(id);
    }
    ids.into_iter().map(|(k, v)| (k, v.len() as u128)).collect()
}

pub fn pattern_has_graph(p: &Pattern) -> bool {
    matches!(p.kind, PatternKind::Graph(..)) || p.children().into_iter().any(pattern_has_graph)
}
