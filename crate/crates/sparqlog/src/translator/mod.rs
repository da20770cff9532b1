//! Translation of SPARQL queries into Datalog± programs whose bag semantics
//! (through identifier columns) coincides with the SPARQL multiset semantics.

mod names;
mod path;
mod pattern;

use std::collections::BTreeSet;

use crate::datalog::{Atom, Builtin, DTerm, Goal, GoalKind, Program, Rule};
use crate::rdf::{fixed_rules, Term};
use crate::sparql::{index_patterns, Path, Pattern, Query, QueryError, QueryForm, TermPattern, MAX_TREE_DEPTH};

use names::VarNames;

/// The graph a sub-pattern is evaluated against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphContext {
    /// A fixed graph, `"default"` outside any `GRAPH` block.
    Const(Term),
    /// Any named graph; the enclosing `GRAPH` rule picks it.
    Named,
}

impl Default for GraphContext {
    fn default() -> GraphContext {
        GraphContext::Const(Term::default_graph())
    }
}

/// Settings shared by all rules of one translation.
#[derive(Clone, Debug, Default)]
pub struct TranslationContext {
    /// Set semantics: no identifier columns at all.
    pub distinct: bool,
    pub graph: GraphContext,
}

/// Builds identifier terms `["tag", vars...]` from a rule's positive body.
#[derive(Clone, Copy, Debug, Default)]
pub struct SkolemGenerator;

impl SkolemGenerator {
    pub fn id(&self, rule_id: &str, label: &str, body_vars: &BTreeSet<String>) -> DTerm {
        DTerm::skolem(format!("{rule_id}{label}"), body_vars.iter().map(DTerm::var).collect())
    }
}

enum IdMode {
    Fresh(String),
    Nil,
}

pub(crate) fn ans(i: u128) -> String {
    format!("ans{i}")
}

/// Accumulates the rules of one translation.
pub(crate) struct Translator {
    distinct: bool,
    names: VarNames,
    skolem: SkolemGenerator,
    rules: Vec<Rule>,
    anchors: BTreeSet<Term>,
}

impl Translator {
    fn new(distinct: bool, names: VarNames) -> Translator {
        Translator { distinct, names, skolem: SkolemGenerator, rules: vec![], anchors: BTreeSet::new() }
    }

    fn dv(&self, var: &str) -> String {
        self.names.get(var)
    }

    fn var(&self, var: &str) -> DTerm {
        DTerm::var(self.dv(var))
    }

    fn term(&self, t: &TermPattern) -> DTerm {
        match t {
            TermPattern::Var(v) => self.var(v),
            TermPattern::Term(t) => DTerm::term(t.clone()),
        }
    }

    /// `pred(ID, cols..., D)` with the identifier position only under bag
    /// semantics.
    fn child(&self, pred: String, id: &str, cols: Vec<DTerm>) -> Atom {
        let mut args = Vec::with_capacity(cols.len() + 2);
        if !self.distinct {
            args.push(DTerm::var(id));
        }
        args.extend(cols);
        args.push(DTerm::var("D"));
        Atom::new(pred, args)
    }

    fn graph_atom(pred: &str, cols: Vec<DTerm>) -> Atom {
        let mut args = cols;
        args.push(DTerm::var("D"));
        Atom::new(pred, args)
    }

    fn restrict_graph(g: &GraphContext, positive: &mut Vec<Atom>, builtins: &mut Vec<Builtin>, bind: bool) {
        match g {
            GraphContext::Const(c) => builtins.push(Builtin::Eq(DTerm::var("D"), DTerm::term(c.clone()))),
            GraphContext::Named if bind => positive.push(Atom::new("named", vec![DTerm::var("D")])),
            GraphContext::Named => {}
        }
    }

    fn emit(
        &mut self,
        i: u128,
        id: IdMode,
        cols: Vec<DTerm>,
        positive: Vec<Atom>,
        negative: Vec<Atom>,
        mut builtins: Vec<Builtin>,
    ) {
        let mut args = Vec::with_capacity(cols.len() + 2);
        if !self.distinct {
            let name = format!("ID{i}");
            args.push(DTerm::var(name.clone()));
            let value = match id {
                IdMode::Fresh(label) => {
                    let vars: BTreeSet<String> = positive.iter().flat_map(|a| a.vars()).collect();
                    self.skolem.id(&format!("f{i}"), &label, &vars)
                }
                IdMode::Nil => DTerm::nil(),
            };
            builtins.push(Builtin::Eq(DTerm::var(name), value));
        }
        args.extend(cols);
        args.push(DTerm::var("D"));
        self.rules.push(Rule { head: Atom::new(ans(i), args), positive, negative, builtins });
    }

    fn push(&mut self, r: Rule) {
        self.rules.push(r);
    }

    fn anchor_facts(&self) -> Vec<Rule> {
        self.anchors.iter().map(|t| Rule::fact(Atom::new("term", vec![DTerm::term(t.clone())]))).collect()
    }
}

/// Rules every translated program relies on: `null/1`, the compatibility
/// relation `comp/3`, and the `term` and `subjectOrObject` views of the
/// data.
pub fn emit_auxiliaries() -> Vec<Rule> {
    let v = |x: &str| DTerm::var(x);
    let null = || DTerm::term(Term::Unbound);
    let term = |x: &str| Atom::new("term", vec![v(x)]);
    let nul = |x: &str| Atom::new("null", vec![v(x)]);
    let comp = |a: DTerm, b: DTerm, c: DTerm| Atom::new("comp", vec![a, b, c]);
    let mut rules = vec![
        Rule::fact(Atom::new("null", vec![null()])),
        Rule::new(comp(v("X"), v("X"), v("X")), vec![term("X")]),
        Rule::new(comp(v("X"), v("Y"), v("X")), vec![term("X"), nul("Y")]),
        Rule::new(comp(v("Y"), v("X"), v("X")), vec![term("X"), nul("Y")]),
        Rule::new(comp(v("X"), v("X"), v("X")), vec![nul("X")]),
    ];
    rules.extend(fixed_rules());
    rules
}

fn check_depth(depth: usize) -> Result<(), QueryError> {
    if depth > MAX_TREE_DEPTH {
        return Err(QueryError::Unsupported(format!("pattern nesting depth {depth} exceeds {MAX_TREE_DEPTH}")));
    }
    Ok(())
}

fn pattern_names(p: &Pattern, extra: &[String]) -> VarNames {
    let mut vars = BTreeSet::new();
    collect_all_vars(p, &mut vars);
    vars.extend(extra.iter().cloned());
    VarNames::new(&vars)
}

fn collect_all_vars(p: &Pattern, out: &mut BTreeSet<String>) {
    out.extend(p.vars());
    match &p.kind {
        crate::sparql::PatternKind::Filter(_, c) | crate::sparql::PatternKind::OptionalFilter(_, _, c) => {
            out.extend(c.vars())
        }
        crate::sparql::PatternKind::Minus(_, b) => collect_all_vars(b, out),
        _ => {}
    }
    for c in p.children() {
        collect_all_vars(c, out);
    }
}

/// Rules for the indexed pattern `p` under `ctx`. Constants used as path
/// anchors come back as `term/1` facts at the end.
pub fn translate_pattern(p: &Pattern, ctx: &TranslationContext) -> Result<Vec<Rule>, QueryError> {
    check_depth(p.depth())?;
    let mut t = Translator::new(ctx.distinct, pattern_names(p, &[]));
    t.pattern(p, &ctx.graph)?;
    let facts = t.anchor_facts();
    t.rules.extend(facts);
    Ok(t.rules)
}

/// Rules for the indexed path `e` connecting `subject` and `object`, the
/// endpoints of the enclosing path pattern.
pub fn translate_path(
    e: &Path,
    subject: &TermPattern,
    object: &TermPattern,
    ctx: &TranslationContext,
) -> Result<Vec<Rule>, QueryError> {
    let mut t = Translator::new(ctx.distinct, VarNames::default());
    t.path(e, &path::anchor(subject, object), &ctx.graph);
    let facts = t.anchor_facts();
    t.rules.extend(facts);
    Ok(t.rules)
}

/// Translates a query with the multiset or set semantics it asks for.
pub fn translate_query(q: &Query) -> Result<Program, QueryError> {
    translate_query_mode(q, q.is_distinct())
}

/// Translates a query; `distinct` forces set semantics.
pub fn translate_query_mode(q: &Query, distinct: bool) -> Result<Program, QueryError> {
    check_depth(q.pattern.depth())?;
    let q = index_patterns(q.clone());
    let distinct = distinct && matches!(q.form, QueryForm::Select(_));
    let projection = q.projection();
    let mut t = Translator::new(distinct, pattern_names(&q.pattern, &projection));
    let var1 = q.pattern.vars();
    let cols1: Vec<DTerm> = var1.iter().map(|x| t.var(x)).collect();
    let body = t.child(ans(1), "ID1", cols1);
    let goal = match &q.form {
        QueryForm::Select(_) => {
            let columns: Vec<String> = projection.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
            let mut positive = vec![body];
            for w in columns.iter().filter(|w| !var1.contains(*w)) {
                positive.push(Atom::new("null", vec![t.var(w)]));
            }
            let mut args = vec![];
            let mut builtins = vec![];
            if !distinct {
                let vars: BTreeSet<String> = positive.iter().flat_map(|a| a.vars()).collect();
                args.push(DTerm::var("ID"));
                builtins.push(Builtin::Eq(DTerm::var("ID"), t.skolem.id("f", "", &vars)));
            }
            args.extend(columns.iter().map(|w| t.var(w)));
            args.push(DTerm::var("D"));
            t.push(Rule { head: Atom::new("ans", args), positive, negative: vec![], builtins });
            Goal {
                predicate: "ans".into(),
                kind: GoalKind::Select { projection: projection.clone() },
                columns,
                has_id: !distinct,
                has_graph: true,
                modifiers: q.modifiers.clone(),
            }
        }
        QueryForm::Ask => {
            let has = || DTerm::var("HasResult");
            let boolean = |b| DTerm::term(Term::boolean(b));
            t.push(Rule::new(Atom::new("ans", vec![has()]), vec![Atom::new("ans_ask", vec![has()])]));
            t.push(
                Rule::fact(Atom::new("ans", vec![has()]))
                    .with_negative(vec![Atom::new("ans_ask", vec![boolean(true)])])
                    .with_builtins(vec![Builtin::Eq(has(), boolean(false))]),
            );
            t.push(
                Rule::new(Atom::new("ans_ask", vec![has()]), vec![body])
                    .with_builtins(vec![Builtin::Eq(has(), boolean(true))]),
            );
            Goal {
                predicate: "ans".into(),
                kind: GoalKind::Ask,
                columns: vec![],
                has_id: false,
                has_graph: false,
                modifiers: q.modifiers.clone(),
            }
        }
    };
    t.pattern(&q.pattern, &GraphContext::default())?;
    let mut rules = std::mem::take(&mut t.rules);
    rules.extend(emit_auxiliaries());
    rules.extend(t.anchor_facts());
    Ok(Program { rules, goal: Some(goal) })
}
