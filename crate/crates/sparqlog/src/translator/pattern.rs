use std::collections::BTreeSet;

use super::{ans, path, GraphContext, IdMode, Translator};
use crate::datalog::{Atom, Builtin, DTerm, Rule};
use crate::rdf::Term;
use crate::sparql::{CmpOp, Expr, Pattern, PatternKind, QueryError, TermPattern};

fn comp(a: DTerm, b: DTerm, c: DTerm) -> Atom {
    Atom::new("comp", vec![a, b, c])
}

fn null(x: DTerm) -> Atom {
    Atom::new("null", vec![x])
}

impl Translator {
    fn renamed(&self, prefix: &str, i: u128, x: &str) -> DTerm {
        DTerm::var(format!("{prefix}_{i}_{}", self.dv(x)))
    }

    fn merged(&self, i: u128, x: &str) -> DTerm {
        DTerm::var(format!("z{i}_{}", self.dv(x)))
    }

    /// Columns of `vars`, with the variables in `shared` renamed by `prefix`.
    fn cols(&self, vars: &BTreeSet<String>, shared: &BTreeSet<String>, prefix: &str, i: u128) -> Vec<DTerm> {
        vars.iter().map(|x| if shared.contains(x) { self.renamed(prefix, i, x) } else { self.var(x) }).collect()
    }

    fn plain(&self, vars: &BTreeSet<String>) -> Vec<DTerm> {
        vars.iter().map(|x| self.var(x)).collect()
    }

    /// The condition over rule variables: variables of `scope` map through
    /// `rename`, others become `Unbound`. A single comparison of a bound
    /// variable with an IRI becomes an equality.
    fn condition(&self, c: &Expr, scope: &BTreeSet<String>, rename: impl Fn(&str) -> DTerm) -> Builtin {
        if let Expr::Compare(CmpOp::Eq, a, b) = c {
            let pair = match (a.as_ref(), b.as_ref()) {
                (Expr::Var(v), Expr::Const(t)) | (Expr::Const(t), Expr::Var(v)) => Some((v, t)),
                _ => None,
            };
            if let Some((v, t @ (Term::Iri(_) | Term::Blank(_)))) = pair {
                if scope.contains(v) {
                    return Builtin::Eq(rename(v), DTerm::term(t.clone()));
                }
            }
        }
        Builtin::Filter(c.substitute(&mut |v| {
            if scope.contains(v) {
                match rename(v) {
                    DTerm::Var(n) => Expr::Var(n),
                    _ => Expr::Const(Term::Unbound),
                }
            } else {
                Expr::Const(Term::Unbound)
            }
        }))
    }

    pub(crate) fn pattern(&mut self, p: &Pattern, g: &GraphContext) -> Result<(), QueryError> {
        let i = p.index;
        if i == 0 {
            return Err(QueryError::Unsupported("pattern tree is not indexed".into()));
        }
        let (l, r) = (2 * i, 2 * i + 1);
        let id_l = format!("ID{l}");
        let id_r = format!("ID{r}");
        let fresh = |label: &str| IdMode::Fresh(label.to_string());
        match &p.kind {
            PatternKind::Unit => {
                let (mut pos, mut b) = (vec![], vec![]);
                Self::restrict_graph(g, &mut pos, &mut b, true);
                self.emit(i, fresh(""), vec![], pos, vec![], b);
            }
            PatternKind::Triple { subject, predicate, object } => {
                let mut pos = vec![Atom::new(
                    "triple",
                    vec![self.term(subject), self.term(predicate), self.term(object), DTerm::var("D")],
                )];
                let mut b = vec![];
                Self::restrict_graph(g, &mut pos, &mut b, false);
                self.emit(i, fresh(""), self.plain(&p.vars()), pos, vec![], b);
            }
            PatternKind::Path { subject, path: e, object } => {
                let pos = vec![self.child(ans(l), &id_l, vec![self.term(subject), self.term(object)])];
                self.emit(i, fresh(""), self.plain(&p.vars()), pos, vec![], vec![]);
                self.path(e, &path::anchor(subject, object), g);
            }
            PatternKind::Join(a, c) => {
                let (v1, v2) = (a.vars(), c.vars());
                let shared: BTreeSet<String> = v1.intersection(&v2).cloned().collect();
                let mut pos = vec![
                    self.child(ans(l), &id_l, self.cols(&v1, &shared, "v1", i)),
                    self.child(ans(r), &id_r, self.cols(&v2, &shared, "v2", i)),
                ];
                for x in &shared {
                    pos.push(comp(self.renamed("v1", i, x), self.renamed("v2", i, x), self.var(x)));
                }
                self.emit(i, fresh(""), self.plain(&p.vars()), pos, vec![], vec![]);
                self.pattern(a, g)?;
                self.pattern(c, g)?;
            }
            PatternKind::Union(a, c) => {
                let (v1, v2) = (a.vars(), c.vars());
                for (label, j, own, other) in [("a", l, &v1, &v2), ("b", r, &v2, &v1)] {
                    let id = format!("ID{j}");
                    let mut pos = vec![self.child(ans(j), &id, self.plain(own))];
                    pos.extend(other.difference(own).map(|x| null(self.var(x))));
                    self.emit(i, fresh(label), self.plain(&p.vars()), pos, vec![], vec![]);
                }
                self.pattern(a, g)?;
                self.pattern(c, g)?;
            }
            PatternKind::Optional(a, c) | PatternKind::OptionalFilter(a, c, _) => {
                let cond = match &p.kind {
                    PatternKind::OptionalFilter(_, _, e) => Some(e),
                    _ => None,
                };
                let (v1, v2) = (a.vars(), c.vars());
                let shared: BTreeSet<String> = v1.intersection(&v2).cloned().collect();
                let both: BTreeSet<String> = v1.union(&v2).cloned().collect();
                let opt = format!("ans_opt{i}");

                let mut pos =
                    vec![self.child(ans(l), &id_l, self.plain(&v1)), self.child(ans(r), &id_r, self.cols(&v2, &shared, "v2", i))];
                for x in &shared {
                    pos.push(comp(self.var(x), self.renamed("v2", i, x), self.merged(i, x)));
                }
                let mut builtins = vec![];
                if let Some(e) = cond {
                    builtins.push(self.condition(e, &both, |x| {
                        if shared.contains(x) {
                            self.merged(i, x)
                        } else {
                            self.var(x)
                        }
                    }));
                }
                self.push(Rule { head: Self::graph_atom(&opt, self.plain(&v1)), positive: pos, negative: vec![], builtins });

                let mut pos = vec![
                    self.child(ans(l), &id_l, self.cols(&v1, &shared, "v1", i)),
                    self.child(ans(r), &id_r, self.cols(&v2, &shared, "v2", i)),
                ];
                for x in &shared {
                    pos.push(comp(self.renamed("v1", i, x), self.renamed("v2", i, x), self.var(x)));
                }
                let builtins = cond.map(|e| self.condition(e, &both, |x| self.var(x))).into_iter().collect();
                self.emit(i, fresh("a"), self.plain(&both), pos, vec![], builtins);

                let mut pos = vec![self.child(ans(l), &id_l, self.plain(&v1))];
                pos.extend(v2.difference(&v1).map(|x| null(self.var(x))));
                let neg = vec![Self::graph_atom(&opt, self.plain(&v1))];
                self.emit(i, fresh("b"), self.plain(&both), pos, neg, vec![]);

                self.pattern(a, g)?;
                self.pattern(c, g)?;
            }
            PatternKind::Minus(a, c) => {
                let (v1, v2) = (a.vars(), c.vars());
                let shared: BTreeSet<String> = v1.intersection(&v2).cloned().collect();
                let equal = format!("ans_equal{i}");
                if !shared.is_empty() {
                    let join = format!("ans_join{i}");
                    let mut joined = self.plain(&v1);
                    joined.extend(self.cols(&v2, &shared, "v2", i));
                    let mut pos = vec![
                        self.child(ans(l), &id_l, self.plain(&v1)),
                        self.child(ans(r), &id_r, self.cols(&v2, &shared, "v2", i)),
                    ];
                    for x in &shared {
                        pos.push(comp(self.var(x), self.renamed("v2", i, x), self.merged(i, x)));
                    }
                    self.push(Rule::new(Self::graph_atom(&join, joined.clone()), pos));
                    for x in &shared {
                        self.push(
                            Rule::new(Self::graph_atom(&equal, self.plain(&v1)), vec![Self::graph_atom(&join, joined.clone())])
                                .with_negative(vec![null(self.var(x))])
                                .with_builtins(vec![Builtin::Eq(self.var(x), self.renamed("v2", i, x))]),
                        );
                    }
                }
                let pos = vec![self.child(ans(l), &id_l, self.plain(&v1))];
                let neg = vec![Self::graph_atom(&equal, self.plain(&v1))];
                self.emit(i, fresh(""), self.plain(&v1), pos, neg, vec![]);
                self.pattern(a, g)?;
                self.pattern(c, g)?;
            }
            PatternKind::Filter(a, e) => {
                let v1 = a.vars();
                let pos = vec![self.child(ans(l), &id_l, self.plain(&v1))];
                let b = vec![self.condition(e, &v1, |x| self.var(x))];
                self.emit(i, fresh(""), self.plain(&v1), pos, vec![], b);
                self.pattern(a, g)?;
            }
            PatternKind::Graph(name, a) => {
                let v1 = a.vars();
                let gv = DTerm::var("G");
                let mut shared = BTreeSet::new();
                let mut b = vec![];
                let mut extra = vec![];
                match name {
                    TermPattern::Term(t) => b.push(Builtin::Eq(gv.clone(), DTerm::term(t.clone()))),
                    TermPattern::Var(v) if v1.contains(v) => {
                        shared.insert(v.clone());
                        extra.push(comp(self.renamed("v1", i, v), gv.clone(), self.var(v)));
                    }
                    TermPattern::Var(v) => b.push(Builtin::Eq(self.var(v), gv.clone())),
                }
                let mut inner = self.cols(&v1, &shared, "v1", i);
                if !self.distinct {
                    inner.insert(0, DTerm::var(&id_l));
                }
                inner.push(gv.clone());
                let mut pos = vec![Atom::new(ans(l), inner), Atom::new("named", vec![gv])];
                pos.extend(extra);
                Self::restrict_graph(g, &mut pos, &mut b, true);
                self.emit(i, fresh(""), self.plain(&p.vars()), pos, vec![], b);
                self.pattern(a, &GraphContext::Named)?;
            }
        }
        Ok(())
    }
}
