use std::collections::{BTreeMap, BTreeSet};

use crate::rdf::{Dataset, Graph, Term};
use crate::solution::{SolutionMapping, SolutionMultiset};
use crate::sparql::{Path, PathKind, Pattern, PatternKind, Query, QueryForm, TermPattern};

/// Pairs of terms with multiplicities.
pub type PairMultiset = BTreeMap<(Term, Term), u64>;

fn add<K: Ord>(m: &mut BTreeMap<K, u64>, k: K, c: u64) {
    if c > 0 {
        let e = m.entry(k).or_insert(0);
        *e = e.saturating_add(c);
    }
}

fn nodes(g: &Graph) -> BTreeSet<Term> {
    g.iter().flat_map(|t| [t.subject.clone(), t.object.clone()]).collect()
}

fn constant(t: &TermPattern) -> Option<&Term> {
    match t {
        TermPattern::Term(t) => Some(t),
        TermPattern::Var(_) => None,
    }
}

fn zero_length(g: &Graph, s: &TermPattern, o: &TermPattern) -> BTreeSet<Term> {
    let mut out = nodes(g);
    match (constant(s), constant(o)) {
        (Some(s), None) => {
            out.insert(s.clone());
        }
        (None, Some(o)) => {
            out.insert(o.clone());
        }
        (Some(s), Some(o)) if s == o => {
            out.insert(s.clone());
        }
        _ => {}
    }
    out
}

fn one_or_more(g: &Graph, p: &Path, s: &TermPattern, o: &TermPattern) -> BTreeSet<(Term, Term)> {
    let step = eval_path_direct(p, g, s, o);
    let mut succ: BTreeMap<&Term, Vec<&Term>> = BTreeMap::new();
    for (x, y) in step.keys() {
        succ.entry(x).or_default().push(y);
    }
    let mut out = BTreeSet::new();
    for &x in succ.keys() {
        let mut seen: BTreeSet<&Term> = BTreeSet::new();
        let mut stack: Vec<&Term> = succ[x].clone();
        while let Some(y) = stack.pop() {
            if seen.insert(y) {
                if let Some(next) = succ.get(y) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        out.extend(seen.into_iter().map(|y| (x.clone(), y.clone())));
    }
    out
}

/// Pairs connected by `p` in `g`. `s` and `o` are the endpoints of the
/// top-level path pattern; they decide the extra zero-length pairs.
pub fn eval_path_direct(p: &Path, g: &Graph, s: &TermPattern, o: &TermPattern) -> PairMultiset {
    let mut out = PairMultiset::new();
    match &p.kind {
        PathKind::Link(iri) => {
            let iri = Term::iri(iri.clone());
            for t in g.iter().filter(|t| t.predicate == iri) {
                add(&mut out, (t.subject.clone(), t.object.clone()), 1);
            }
        }
        PathKind::Inverse(a) => {
            for ((x, y), c) in eval_path_direct(a, g, s, o) {
                add(&mut out, (y, x), c);
            }
        }
        PathKind::Alternative(a, b) => {
            for part in [eval_path_direct(a, g, s, o), eval_path_direct(b, g, s, o)] {
                for (k, c) in part {
                    add(&mut out, k, c);
                }
            }
        }
        PathKind::Sequence(a, b) => {
            let left = eval_path_direct(a, g, s, o);
            let right = eval_path_direct(b, g, s, o);
            for ((x, y), c1) in &left {
                for ((y2, z), c2) in &right {
                    if y == y2 {
                        add(&mut out, (x.clone(), z.clone()), c1.saturating_mul(*c2));
                    }
                }
            }
        }
        PathKind::OneOrMore(a) => {
            for k in one_or_more(g, a, s, o) {
                out.insert(k, 1);
            }
        }
        PathKind::ZeroOrOne(a) | PathKind::ZeroOrMore(a) => {
            for x in zero_length(g, s, o) {
                out.insert((x.clone(), x), 1);
            }
            let more: BTreeSet<(Term, Term)> = if matches!(p.kind, PathKind::ZeroOrOne(_)) {
                eval_path_direct(a, g, s, o).into_keys().collect()
            } else {
                one_or_more(g, a, s, o)
            };
            for k in more {
                out.insert(k, 1);
            }
        }
        PathKind::Negated { forward, backward } => {
            let fwd: BTreeSet<Term> = forward.iter().map(|i| Term::iri(i.clone())).collect();
            let bwd: BTreeSet<Term> = backward.iter().map(|i| Term::iri(i.clone())).collect();
            for t in g {
                if !fwd.is_empty() && !fwd.contains(&t.predicate) {
                    add(&mut out, (t.subject.clone(), t.object.clone()), 1);
                }
                if !bwd.is_empty() && !bwd.contains(&t.predicate) {
                    add(&mut out, (t.object.clone(), t.subject.clone()), 1);
                }
            }
        }
    }
    out
}

/// Binds `tp` to `value` in `m`; false on a conflict.
fn bind(m: &mut SolutionMapping, tp: &TermPattern, value: &Term) -> bool {
    match tp {
        TermPattern::Term(t) => t == value,
        TermPattern::Var(v) => {
            if m.is_bound(v) {
                m.get(v) == value
            } else {
                m.insert(v.clone(), value.clone());
                true
            }
        }
    }
}

fn join(a: &SolutionMultiset, b: &SolutionMultiset) -> Vec<(SolutionMapping, SolutionMapping, u64)> {
    let mut out = Vec::new();
    for (m1, c1) in a.iter() {
        for (m2, c2) in b.iter() {
            if m1.compatible(m2) {
                out.push((m1.clone(), m1.merge(m2), c1.saturating_mul(c2)));
            }
        }
    }
    out
}

/// Multiset of solutions of `p` over `d` with active graph `active`
/// (`None` for the default graph).
pub fn eval_pattern_direct(p: &Pattern, d: &Dataset, active: Option<&str>) -> SolutionMultiset {
    let mut out = SolutionMultiset::new(p.vars().into_iter().collect());
    let empty = Graph::new();
    let g = d.graph(active).unwrap_or(&empty);
    match &p.kind {
        PatternKind::Unit => out.add(SolutionMapping::new(), 1),
        PatternKind::Triple { subject, predicate, object } => {
            for t in g {
                let mut m = SolutionMapping::new();
                if bind(&mut m, subject, &t.subject) && bind(&mut m, predicate, &t.predicate) && bind(&mut m, object, &t.object)
                {
                    out.add(m, 1);
                }
            }
        }
        PatternKind::Path { subject, path, object } => {
            for ((x, y), c) in eval_path_direct(path, g, subject, object) {
                let mut m = SolutionMapping::new();
                if bind(&mut m, subject, &x) && bind(&mut m, object, &y) {
                    out.add(m, c);
                }
            }
        }
        PatternKind::Join(a, b) => {
            for (_, m, c) in join(&eval_pattern_direct(a, d, active), &eval_pattern_direct(b, d, active)) {
                out.add(m, c);
            }
        }
        PatternKind::Union(a, b) => {
            for part in [eval_pattern_direct(a, d, active), eval_pattern_direct(b, d, active)] {
                for (m, c) in part.iter() {
                    out.add(m.clone(), c);
                }
            }
        }
        PatternKind::Optional(a, b) => {
            let (l, r) = (eval_pattern_direct(a, d, active), eval_pattern_direct(b, d, active));
            for (_, m, c) in join(&l, &r) {
                out.add(m, c);
            }
            for (m1, c1) in l.iter() {
                if !r.iter().any(|(m2, _)| m1.compatible(m2)) {
                    out.add(m1.clone(), c1);
                }
            }
        }
        PatternKind::OptionalFilter(a, b, cond) => {
            let (l, r) = (eval_pattern_direct(a, d, active), eval_pattern_direct(b, d, active));
            let mut extended = BTreeSet::new();
            for (m1, m, c) in join(&l, &r) {
                if cond.holds(&mut |v| m.get(v).clone()) {
                    extended.insert(m1);
                    out.add(m, c);
                }
            }
            for (m1, c1) in l.iter() {
                if !extended.contains(m1) {
                    out.add(m1.clone(), c1);
                }
            }
        }
        PatternKind::Minus(a, b) => {
            let (l, r) = (eval_pattern_direct(a, d, active), eval_pattern_direct(b, d, active));
            for (m1, c1) in l.iter() {
                if !r.iter().any(|(m2, _)| m1.compatible(m2) && m1.shares_domain(m2)) {
                    out.add(m1.clone(), c1);
                }
            }
        }
        PatternKind::Filter(a, cond) => {
            for (m, c) in eval_pattern_direct(a, d, active).iter() {
                if cond.holds(&mut |v| m.get(v).clone()) {
                    out.add(m.clone(), c);
                }
            }
        }
        PatternKind::Graph(name, a) => match name {
            TermPattern::Term(Term::Iri(iri)) => {
                if d.named_graphs.contains_key(iri) {
                    for (m, c) in eval_pattern_direct(a, d, Some(iri)).iter() {
                        out.add(m.clone(), c);
                    }
                }
            }
            TermPattern::Term(_) => {}
            TermPattern::Var(v) => {
                for iri in d.named_graphs.keys() {
                    let g = Term::iri(iri.clone());
                    for (m, c) in eval_pattern_direct(a, d, Some(iri)).iter() {
                        let mut m = m.clone();
                        if bind(&mut m, &TermPattern::Var(v.clone()), &g) {
                            out.add(m, c);
                        }
                    }
                }
            }
        },
    }
    out
}

/// Answer of the direct evaluator for a whole query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DirectAnswer {
    Solutions(SolutionMultiset),
    Boolean(bool),
}

/// Evaluates a query over the default graph of `d`: projection, then
/// `DISTINCT`. Other solution modifiers are not applied.
pub fn eval_query_direct(q: &Query, d: &Dataset) -> DirectAnswer {
    let all = eval_pattern_direct(&q.pattern, d, None);
    match q.form {
        QueryForm::Ask => DirectAnswer::Boolean(!all.is_empty()),
        QueryForm::Select(_) => {
            let vars = q.projection();
            let mut out = SolutionMultiset::new(vars.clone());
            for (m, c) in all.iter() {
                out.add(m.project(&vars), c);
            }
            DirectAnswer::Solutions(if q.is_distinct() { out.distinct() } else { out })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{parse_ntriples, Triple};
    use crate::sparql::parse_query;

    fn iri(s: &str) -> Term {
        Term::iri(format!("http://ex.org/{s}"))
    }

    fn graph(edges: &[(&str, &str, &str)]) -> Graph {
        edges.iter().map(|(s, p, o)| Triple::new(iri(s), iri(p), iri(o)).unwrap()).collect()
    }

    fn people() -> Dataset {
        let data = "<http://ex.org/glucas> <http://ex.org/name> \"George\" .
<http://ex.org/glucas> <http://ex.org/lastname> \"Lucas\" .
_:b1 <http://ex.org/name> \"Steven\" .
";
        Dataset::from_triples(parse_ntriples(data).unwrap())
    }

    fn solutions(q: &str, d: &Dataset) -> SolutionMultiset {
        match eval_query_direct(&parse_query(q).unwrap(), d) {
            DirectAnswer::Solutions(s) => s,
            DirectAnswer::Boolean(_) => panic!("select expected"),
        }
    }

    #[test]
    fn optional_pads_missing_values() {
        let s = solutions(
            "SELECT ?N ?L WHERE { ?X <http://ex.org/name> ?N OPTIONAL { ?X <http://ex.org/lastname> ?L } }",
            &people(),
        );
        assert_eq!(s.len(), 2);
        let george = SolutionMapping::from_pairs([("N", Term::plain("George")), ("L", Term::plain("Lucas"))]);
        let steven = SolutionMapping::from_pairs([("N", Term::plain("Steven"))]);
        assert_eq!(s.multiplicity(&george), 1);
        assert_eq!(s.multiplicity(&steven), 1);
    }

    #[test]
    fn join_with_empty_side_is_empty() {
        let s = solutions("SELECT * WHERE { ?x <http://ex.org/name> ?n . ?x <http://ex.org/none> ?m }", &people());
        assert!(s.is_empty());
    }

    #[test]
    fn union_adds_multiplicities() {
        let d = Dataset::from_triples(graph(&[("a", "p", "b")]));
        let s = solutions("SELECT * WHERE { { ?x <http://ex.org/p> ?y } UNION { ?x <http://ex.org/p> ?y } }", &d);
        assert_eq!(s.entries.values().copied().collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn closure_on_a_cycle() {
        let g = graph(&[("a", "p", "b"), ("b", "p", "a")]);
        let star = Path::zero_or_more(Path::link("http://ex.org/p"));
        let pairs = eval_path_direct(&star, &g, &TermPattern::var("x"), &TermPattern::var("y"));
        let expected: PairMultiset =
            [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")].iter().map(|(x, y)| ((iri(x), iri(y)), 1)).collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn zero_length_anchor() {
        let g = graph(&[("a", "p", "b")]);
        let opt = Path::zero_or_one(Path::link("http://ex.org/p"));
        let z = TermPattern::Term(iri("z"));
        let pairs = eval_path_direct(&opt, &g, &z, &TermPattern::var("y"));
        assert_eq!(pairs.get(&(iri("z"), iri("z"))), Some(&1));
        let pairs = eval_path_direct(&opt, &g, &TermPattern::var("x"), &TermPattern::var("y"));
        assert!(!pairs.contains_key(&(iri("z"), iri("z"))));
    }

    #[test]
    fn reachability_from_spain() {
        let g = graph(&[
            ("spain", "borders", "france"),
            ("france", "borders", "belgium"),
            ("france", "borders", "germany"),
            ("belgium", "borders", "germany"),
            ("germany", "borders", "austria"),
        ]);
        let s = solutions(
            "SELECT ?B WHERE { ?A <http://ex.org/borders>+ ?B . FILTER (?A = <http://ex.org/spain>) }",
            &Dataset::from_triples(g),
        );
        let got: BTreeMap<Term, u64> = s.iter().map(|(m, c)| (m.get("B").clone(), c)).collect();
        let expected: BTreeMap<Term, u64> =
            ["france", "germany", "austria", "belgium"].iter().map(|c| (iri(c), 1)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn minus_needs_a_shared_variable() {
        let d = Dataset::from_triples(graph(&[("a", "p", "b"), ("c", "q", "d")]));
        let s = solutions("SELECT * WHERE { ?x <http://ex.org/p> ?y MINUS { ?u <http://ex.org/q> ?v } }", &d);
        assert_eq!(s.len(), 1);
        let s = solutions("SELECT * WHERE { ?x <http://ex.org/p> ?y MINUS { ?x <http://ex.org/p> ?v } }", &d);
        assert!(s.is_empty());
    }

    #[test]
    fn graph_iterates_named_graphs() {
        let d = Dataset::new().with_named("http://ex.org/g1", graph(&[("a", "p", "b")])).with_named(
            "http://ex.org/g2",
            graph(&[("a", "p", "b"), ("c", "p", "d")]),
        );
        let s = solutions("SELECT * WHERE { GRAPH ?g { ?x <http://ex.org/p> ?y } }", &d);
        assert_eq!(s.len(), 3);
        let s = solutions("SELECT * WHERE { GRAPH <http://ex.org/g1> { ?x <http://ex.org/p> ?y } }", &d);
        assert_eq!(s.len(), 1);
        let s = solutions("SELECT * WHERE { ?x <http://ex.org/p> ?y }", &d);
        assert!(s.is_empty());
    }

    #[test]
    fn ask_on_an_absent_anchor() {
        let d = Dataset::from_triples(graph(&[("a", "p", "b")]));
        let q = parse_query("ASK { <http://ex.org/x> <http://ex.org/p>? <http://ex.org/x> }").unwrap();
        assert_eq!(eval_query_direct(&q, &d), DirectAnswer::Boolean(true));
        let q = parse_query("ASK { ?s <http://ex.org/nothing> ?o }").unwrap();
        assert_eq!(eval_query_direct(&q, &Dataset::new()), DirectAnswer::Boolean(false));
    }
}
