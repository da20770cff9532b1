use super::{ans, GraphContext, IdMode, Translator};
use crate::datalog::{Atom, Builtin, DTerm};
use crate::rdf::Term;
use crate::sparql::{Path, PathKind, TermPattern};

/// The constant a zero-length match may start and end at when it does not
/// occur in the active graph: the single constant endpoint of the path
/// pattern, or the shared one when both endpoints are the same constant.
pub(crate) fn anchor(subject: &TermPattern, object: &TermPattern) -> Option<Term> {
    match (subject, object) {
        (TermPattern::Term(t), TermPattern::Var(_)) | (TermPattern::Var(_), TermPattern::Term(t)) => Some(t.clone()),
        (TermPattern::Term(s), TermPattern::Term(o)) if s == o => Some(s.clone()),
        _ => None,
    }
}

fn v(name: &str) -> DTerm {
    DTerm::var(name)
}

fn triple(p: DTerm) -> Atom {
    Atom::new("triple", vec![v("X"), p, v("Y"), v("D")])
}

impl Translator {
    fn zero_length(&mut self, i: u128, anchor: &Option<Term>, g: &GraphContext) {
        let mut pos = vec![Atom::new("subjectOrObject", vec![v("X"), v("D")])];
        let mut b = vec![];
        Self::restrict_graph(g, &mut pos, &mut b, false);
        self.emit(i, IdMode::Nil, vec![v("X"), v("X")], pos, vec![], b);
        if let Some(t) = anchor {
            self.anchors.insert(t.clone());
            let (mut pos, mut b) = (vec![], vec![]);
            Self::restrict_graph(g, &mut pos, &mut b, true);
            b.push(Builtin::Eq(v("X"), DTerm::term(t.clone())));
            let neg = vec![Atom::new("subjectOrObject", vec![v("X"), v("D")])];
            self.emit(i, IdMode::Nil, vec![v("X"), v("X")], pos, neg, b);
        }
    }

    fn one_step(&mut self, i: u128) {
        let l = 2 * i;
        let pos = vec![self.child(ans(l), &format!("ID{l}"), vec![v("X"), v("Y")])];
        self.emit(i, IdMode::Nil, vec![v("X"), v("Y")], pos, vec![], vec![]);
    }

    fn transitive_step(&mut self, i: u128) {
        let l = 2 * i;
        let pos = vec![
            self.child(ans(l), &format!("ID{l}"), vec![v("X"), v("Y")]),
            self.child(ans(i), &format!("ID{i}r"), vec![v("Y"), v("Z")]),
        ];
        self.emit(i, IdMode::Nil, vec![v("X"), v("Z")], pos, vec![], vec![]);
    }

    /// Rules for `ans_i(ID, X, Y, D)`: the pairs connected by path `e` in
    /// graph `D`. `anchor` comes from the endpoints of the enclosing path
    /// pattern and applies to every zero-length form below it.
    pub(crate) fn path(&mut self, e: &Path, anchor: &Option<Term>, g: &GraphContext) {
        let i = e.index;
        let (l, r) = (2 * i, 2 * i + 1);
        let id_l = format!("ID{l}");
        let id_r = format!("ID{r}");
        let fresh = |label: &str| IdMode::Fresh(label.to_string());
        match &e.kind {
            PathKind::Link(p) => {
                let mut pos = vec![triple(DTerm::term(Term::iri(p.clone())))];
                let mut b = vec![];
                Self::restrict_graph(g, &mut pos, &mut b, false);
                self.emit(i, fresh(""), vec![v("X"), v("Y")], pos, vec![], b);
            }
            PathKind::Inverse(a) => {
                let pos = vec![self.child(ans(l), &id_l, vec![v("Y"), v("X")])];
                self.emit(i, fresh(""), vec![v("X"), v("Y")], pos, vec![], vec![]);
                self.path(a, anchor, g);
            }
            PathKind::Alternative(a, c) => {
                let pos = vec![self.child(ans(l), &id_l, vec![v("X"), v("Y")])];
                self.emit(i, fresh("a"), vec![v("X"), v("Y")], pos, vec![], vec![]);
                let pos = vec![self.child(ans(r), &id_r, vec![v("X"), v("Y")])];
                self.emit(i, fresh("b"), vec![v("X"), v("Y")], pos, vec![], vec![]);
                self.path(a, anchor, g);
                self.path(c, anchor, g);
            }
            PathKind::Sequence(a, c) => {
                let pos = vec![
                    self.child(ans(l), &id_l, vec![v("X"), v("Y")]),
                    self.child(ans(r), &id_r, vec![v("Y"), v("Z")]),
                ];
                self.emit(i, fresh(""), vec![v("X"), v("Z")], pos, vec![], vec![]);
                self.path(a, anchor, g);
                self.path(c, anchor, g);
            }
            PathKind::ZeroOrOne(a) => {
                self.zero_length(i, anchor, g);
                self.one_step(i);
                self.path(a, anchor, g);
            }
            PathKind::OneOrMore(a) => {
                self.one_step(i);
                self.transitive_step(i);
                self.path(a, anchor, g);
            }
            PathKind::ZeroOrMore(a) => {
                self.zero_length(i, anchor, g);
                self.one_step(i);
                self.transitive_step(i);
                self.path(a, anchor, g);
            }
            PathKind::Negated { forward, backward } => {
                for (label, set, cols) in [("a", forward, [v("X"), v("Y")]), ("b", backward, [v("Y"), v("X")])] {
                    if set.is_empty() {
                        continue;
                    }
                    let mut pos = vec![triple(v("P"))];
                    let mut b: Vec<Builtin> =
                        set.iter().map(|p| Builtin::Ne(v("P"), DTerm::term(Term::iri(p.clone())))).collect();
                    Self::restrict_graph(g, &mut pos, &mut b, false);
                    self.emit(i, fresh(label), cols.to_vec(), pos, vec![], b);
                }
            }
        }
    }
}
