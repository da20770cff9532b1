//! Turning derived answer facts back into SPARQL solutions: extraction,
//! solution modifiers, and TSV/JSON result documents.

mod format;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::datalog::{DerivedFacts, Goal, GoalKind, Value};
use crate::rdf::Term;
use crate::sparql::Modifiers;

pub use format::{parse_tsv, serialize, serialize_boolean, Format};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error("result line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown result format {0:?}")]
    UnknownFormat(String),
}

/// Variable bindings of one solution; unbound variables are absent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolutionMapping {
    bindings: BTreeMap<String, Term>,
}

impl SolutionMapping {
    pub fn new() -> SolutionMapping {
        SolutionMapping::default()
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Term)>) -> SolutionMapping {
        let mut m = SolutionMapping::new();
        for (v, t) in pairs {
            m.insert(v, t);
        }
        m
    }

    /// Binds `var`; binding to `Unbound` removes it.
    pub fn insert(&mut self, var: impl Into<String>, t: Term) {
        let var = var.into();
        if t.is_unbound() {
            self.bindings.remove(&var);
        } else {
            self.bindings.insert(var, t);
        }
    }

    pub fn get(&self, var: &str) -> &Term {
        const UNBOUND: Term = Term::Unbound;
        self.bindings.get(var).unwrap_or(&UNBOUND)
    }

    pub fn is_bound(&self, var: &str) -> bool {
        self.bindings.contains_key(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Agreement on every shared bound variable.
    pub fn compatible(&self, other: &SolutionMapping) -> bool {
        self.bindings.iter().all(|(v, t)| other.bindings.get(v).is_none_or(|u| u == t))
    }

    pub fn merge(&self, other: &SolutionMapping) -> SolutionMapping {
        let mut out = self.clone();
        for (v, t) in &other.bindings {
            out.bindings.entry(v.clone()).or_insert_with(|| t.clone());
        }
        out
    }

    pub fn shares_domain(&self, other: &SolutionMapping) -> bool {
        self.bindings.keys().any(|v| other.bindings.contains_key(v))
    }

    pub fn project(&self, vars: &[String]) -> SolutionMapping {
        SolutionMapping {
            bindings: vars.iter().filter_map(|v| self.bindings.get(v).map(|t| (v.clone(), t.clone()))).collect(),
        }
    }

    pub fn values(&self, vars: &[String]) -> Vec<Term> {
        vars.iter().map(|v| self.get(v).clone()).collect()
    }
}

/// A multiset of solutions over a list of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolutionMultiset {
    pub vars: Vec<String>,
    pub entries: BTreeMap<SolutionMapping, u64>,
}

impl SolutionMultiset {
    pub fn new(vars: Vec<String>) -> SolutionMultiset {
        SolutionMultiset { vars, entries: BTreeMap::new() }
    }

    pub fn add(&mut self, m: SolutionMapping, count: u64) {
        if count > 0 {
            *self.entries.entry(m).or_insert(0) += count;
        }
    }

    pub fn multiplicity(&self, m: &SolutionMapping) -> u64 {
        self.entries.get(m).copied().unwrap_or(0)
    }

    /// Total number of solutions, duplicates included.
    pub fn len(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The support set, each solution once.
    pub fn distinct(&self) -> SolutionMultiset {
        SolutionMultiset { vars: self.vars.clone(), entries: self.entries.keys().map(|m| (m.clone(), 1)).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SolutionMapping, u64)> {
        self.entries.iter().map(|(m, c)| (m, *c))
    }
}

/// Reads the answer predicate: identifier and graph columns are dropped and
/// each distinct answer fact counts once towards its solution.
pub fn extract_solutions(df: &DerivedFacts, goal: &Goal) -> SolutionMultiset {
    let vars = match &goal.kind {
        GoalKind::Select { projection } => projection.clone(),
        GoalKind::Ask => vec![],
    };
    let mut out = SolutionMultiset::new(vars);
    if goal.kind == GoalKind::Ask {
        return out;
    }
    let offset = usize::from(goal.has_id);
    for row in df.rows(&goal.predicate) {
        if row.len() != goal.arity() {
            continue;
        }
        let mut m = SolutionMapping::new();
        for (k, col) in goal.columns.iter().enumerate() {
            if let Some(t) = df.term(row[offset + k]) {
                m.insert(col.clone(), t.clone());
            }
        }
        out.add(m, 1);
    }
    out
}

/// True iff the answer predicate holds for `true`.
pub fn eval_ask(df: &DerivedFacts, goal: &Goal) -> bool {
    df.contains(&goal.predicate, &[Value::Term(Term::boolean(true))])
}

fn compare_on(a: &SolutionMapping, b: &SolutionMapping, vars: &[String]) -> Ordering {
    vars.iter().map(|v| a.get(v).order_cmp(b.get(v))).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Expands the multiset into a sequence: base order by the output variables,
/// then a stable sort on the `ORDER BY` keys, duplicate removal under
/// `DISTINCT`, and finally `OFFSET` and `LIMIT`.
pub fn apply_modifiers(ms: &SolutionMultiset, mods: &Modifiers) -> Vec<SolutionMapping> {
    let mut rows: Vec<(&SolutionMapping, u64)> = ms.iter().collect();
    rows.sort_by(|a, b| compare_on(a.0, b.0, &ms.vars).then_with(|| a.0.cmp(b.0)));
    rows.sort_by(|a, b| {
        mods.order_by
            .iter()
            .map(|k| {
                let o = a.0.get(&k.var).order_cmp(b.0.get(&k.var));
                if k.descending {
                    o.reverse()
                } else {
                    o
                }
            })
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    let skip = mods.offset.unwrap_or(0);
    let take = mods.limit.unwrap_or(u64::MAX);
    let mut out = Vec::new();
    let mut seen = 0u64;
    for (m, count) in rows {
        let count = if mods.distinct { 1 } else { count };
        for _ in 0..count {
            if seen >= skip.saturating_add(take) {
                return out;
            }
            if seen >= skip {
                out.push(m.clone());
            }
            seen += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparql::OrderKey;

    fn m(pairs: &[(&str, Term)]) -> SolutionMapping {
        SolutionMapping::from_pairs(pairs.iter().cloned())
    }

    fn sample() -> SolutionMultiset {
        let mut ms = SolutionMultiset::new(vec!["n".into()]);
        for (k, c) in [(3, 1), (1, 2), (2, 1)] {
            ms.add(m(&[("n", Term::integer(k))]), c);
        }
        ms
    }

    #[test]
    fn unbound_is_absence() {
        let a = m(&[("x", Term::Unbound), ("y", Term::iri("http://ex.org/a"))]);
        assert!(!a.is_bound("x"));
        assert_eq!(a.get("x"), &Term::Unbound);
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn compatibility_and_merge() {
        let a = m(&[("x", Term::plain("1"))]);
        let b = m(&[("x", Term::plain("1")), ("y", Term::plain("2"))]);
        let c = m(&[("x", Term::plain("3"))]);
        assert!(a.compatible(&b) && b.compatible(&a));
        assert!(!a.compatible(&c));
        assert_eq!(a.merge(&b), b);
        assert!(a.shares_domain(&b));
        assert!(!a.shares_domain(&m(&[("z", Term::plain("1"))])));
    }

    #[test]
    fn order_offset_limit() {
        let ms = sample();
        let all = apply_modifiers(&ms, &Modifiers::default());
        assert_eq!(all.len(), 4);
        let mods = Modifiers {
            order_by: vec![OrderKey { var: "n".into(), descending: true }],
            offset: Some(1),
            limit: Some(2),
            ..Modifiers::default()
        };
        let got: Vec<Term> = apply_modifiers(&ms, &mods).iter().map(|s| s.get("n").clone()).collect();
        assert_eq!(got, vec![Term::integer(2), Term::integer(1)]);
        let zero = Modifiers { limit: Some(0), ..Modifiers::default() };
        assert!(apply_modifiers(&ms, &zero).is_empty());
    }

    #[test]
    fn distinct_keeps_support() {
        let ms = sample();
        assert_eq!(ms.len(), 4);
        assert_eq!(ms.distinct().len(), 3);
        let mods = Modifiers { distinct: true, ..Modifiers::default() };
        assert_eq!(apply_modifiers(&ms, &mods).len(), 3);
    }
}
