use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::OracleError;
use crate::datalog::{Atom, Builtin, DTerm, Fact, Program, Rule, Value};
use crate::rdf::{FactBase, Term};

/// Number of derivation trees of an atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Multiplicity {
    Finite(u128),
    Infinite,
}

/// Bounds for [`count_derivation_trees_with`].
#[derive(Clone, Copy, Debug)]
pub struct DtLimits {
    /// Upper bound on the number of ground rule instances.
    pub max_instances: usize,
}

impl Default for DtLimits {
    fn default() -> DtLimits {
        DtLimits { max_instances: 1_000_000 }
    }
}

type GroundAtom = (String, Vec<Value>);
type Subst = BTreeMap<String, Value>;

fn value_of(t: &DTerm, s: &Subst) -> Option<Value> {
    match t {
        DTerm::Const(v) => Some(v.clone()),
        DTerm::Var(x) => s.get(x).cloned(),
        DTerm::Skolem { tag, args } => {
            Some(Value::skolem(tag.clone(), args.iter().map(|a| value_of(a, s)).collect::<Option<Vec<_>>>()?))
        }
    }
}

fn unify(args: &[DTerm], row: &[Value], s: &mut Subst) -> bool {
    args.len() == row.len()
        && args.iter().zip(row).all(|(a, v)| match a {
            DTerm::Var(x) => match s.get(x) {
                Some(b) => b == v,
                None => {
                    s.insert(x.clone(), v.clone());
                    true
                }
            },
            other => value_of(other, s).as_ref() == Some(v),
        })
}

/// Applies the built-ins in any order that makes progress; `None` when some
/// constraint fails or can never be decided.
fn builtins(r: &Rule, mut s: Subst) -> Option<Subst> {
    let mut pending: Vec<&Builtin> = r.builtins.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for b in pending {
            match b {
                Builtin::Eq(a, c) => match (value_of(a, &s), value_of(c, &s)) {
                    (Some(x), Some(y)) if x == y => {}
                    (Some(_), Some(_)) => return None,
                    (None, Some(y)) if a.as_var().is_some() => {
                        s.insert(a.as_var()?.to_string(), y);
                    }
                    (Some(x), None) if c.as_var().is_some() => {
                        s.insert(c.as_var()?.to_string(), x);
                    }
                    _ => rest.push(b),
                },
                Builtin::Ne(a, c) => match (value_of(a, &s), value_of(c, &s)) {
                    (Some(x), Some(y)) if x != y => {}
                    (Some(_), Some(_)) => return None,
                    _ => rest.push(b),
                },
                Builtin::Filter(e) => {
                    if e.vars().iter().all(|v| s.contains_key(v)) {
                        let ok = e.holds(&mut |v| match s.get(v) {
                            Some(Value::Term(t)) => t.clone(),
                            _ => Term::Unbound,
                        });
                        if !ok {
                            return None;
                        }
                    } else {
                        rest.push(b);
                    }
                }
            }
        }
        if rest.len() == before {
            return None;
        }
        pending = rest;
    }
    Some(s)
}

struct Db {
    facts: BTreeMap<String, BTreeSet<Vec<Value>>>,
}

impl Db {
    fn contains(&self, (p, args): &GroundAtom) -> bool {
        self.facts.get(p).is_some_and(|rows| rows.contains(args))
    }

    fn insert(&mut self, (p, args): GroundAtom) -> bool {
        self.facts.entry(p).or_default().insert(args)
    }

    /// Every ground instance of `r` over the current facts, as head and
    /// positive body atoms.
    fn instances(&self, r: &Rule, limit: usize) -> Result<Vec<(GroundAtom, Vec<GroundAtom>)>, OracleError> {
        let mut partial: Vec<Subst> = vec![Subst::new()];
        for a in &r.positive {
            let rows = match self.facts.get(&a.predicate) {
                Some(rows) => rows,
                None => return Ok(vec![]),
            };
            let mut next = Vec::new();
            for s in &partial {
                for row in rows {
                    let mut s2 = s.clone();
                    if unify(&a.args, row, &mut s2) {
                        next.push(s2);
                        if next.len() > limit {
                            return Err(OracleError::ResourceLimit(format!("more than {limit} rule instances")));
                        }
                    }
                }
            }
            partial = next;
        }
        let ground = |a: &Atom, s: &Subst| -> Option<GroundAtom> {
            Some((a.predicate.clone(), a.args.iter().map(|t| value_of(t, s)).collect::<Option<Vec<_>>>()?))
        };
        let mut out = Vec::new();
        for s in partial {
            let Some(s) = builtins(r, s) else { continue };
            if r.negative.iter().any(|n| ground(n, &s).is_none_or(|g| self.contains(&g))) {
                continue;
            }
            let Some(head) = ground(&r.head, &s) else {
                return Err(OracleError::Unsupported(format!("unsafe rule {r}")));
            };
            let body = r.positive.iter().map(|a| ground(a, &s).expect("positive atoms are ground")).collect();
            out.push((head, body));
        }
        Ok(out)
    }
}

/// Predicate levels such that positive dependencies never go down and
/// negative ones strictly go up.
fn levels(rules: &[Rule]) -> Result<BTreeMap<String, usize>, OracleError> {
    let mut level: BTreeMap<String, usize> = BTreeMap::new();
    for r in rules {
        for a in std::iter::once(&r.head).chain(&r.positive).chain(&r.negative) {
            level.entry(a.predicate.clone()).or_insert(0);
        }
    }
    let bound = level.len() + 1;
    loop {
        let mut changed = false;
        for r in rules {
            let mut need = level[&r.head.predicate];
            for a in &r.positive {
                need = need.max(level[&a.predicate]);
            }
            for a in &r.negative {
                need = need.max(level[&a.predicate] + 1);
            }
            if need > level[&r.head.predicate] {
                if need > bound {
                    return Err(OracleError::NotStratifiable(r.head.predicate.clone()));
                }
                level.insert(r.head.predicate.clone(), need);
                changed = true;
            }
        }
        if !changed {
            return Ok(level);
        }
    }
}

pub fn count_derivation_trees(p: &Program, fb: &FactBase, atom: &Fact) -> Result<Multiplicity, OracleError> {
    count_derivation_trees_with(p, fb, atom, DtLimits::default())
}

/// Counts the derivation trees of `atom`: database facts are leaves, every
/// ground rule instance whose body atoms have trees is an inner node.
/// Atoms on or above a cycle of such instances have infinitely many trees.
pub fn count_derivation_trees_with(
    p: &Program,
    fb: &FactBase,
    atom: &Fact,
    limits: DtLimits,
) -> Result<Multiplicity, OracleError> {
    let rules: Vec<Rule> = fb.rules.iter().chain(&p.rules).cloned().collect();
    let level = levels(&rules)?;
    let mut db = Db { facts: BTreeMap::new() };
    let mut leaves: BTreeSet<GroundAtom> = BTreeSet::new();
    for f in &fb.facts {
        let g = (f.predicate.clone(), f.args.iter().cloned().map(Value::Term).collect());
        leaves.insert(g.clone());
        db.insert(g);
    }
    let top = level.values().copied().max().unwrap_or(0);
    for l in 0..=top {
        let stratum: Vec<&Rule> = rules.iter().filter(|r| level[&r.head.predicate] == l).collect();
        loop {
            let mut fresh = Vec::new();
            for r in &stratum {
                for (head, _) in db.instances(r, limits.max_instances)? {
                    if !db.contains(&head) {
                        fresh.push(head);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            for f in fresh {
                db.insert(f);
            }
        }
    }
    let mut edges: HashMap<GroundAtom, Vec<Vec<GroundAtom>>> = HashMap::new();
    let mut total = 0usize;
    for r in &rules {
        for (head, body) in db.instances(r, limits.max_instances)? {
            total += 1;
            if total > limits.max_instances {
                return Err(OracleError::ResourceLimit(format!("more than {} rule instances", limits.max_instances)));
            }
            edges.entry(head).or_default().push(body);
        }
    }
    let target: GroundAtom = (atom.predicate.clone(), atom.args.iter().cloned().map(Value::Term).collect());
    if !db.contains(&target) {
        return Ok(Multiplicity::Finite(0));
    }
    Counter { edges: &edges, leaves: &leaves, memo: HashMap::new() }.count(&target)
}

#[derive(Clone, Copy)]
enum Mark {
    Active,
    Done(Multiplicity),
}

struct Counter<'a> {
    edges: &'a HashMap<GroundAtom, Vec<Vec<GroundAtom>>>,
    leaves: &'a BTreeSet<GroundAtom>,
    memo: HashMap<GroundAtom, Mark>,
}

impl Counter<'_> {
    fn count(&mut self, a: &GroundAtom) -> Result<Multiplicity, OracleError> {
        match self.memo.get(a) {
            Some(Mark::Done(m)) => return Ok(*m),
            Some(Mark::Active) => return Ok(Multiplicity::Infinite),
            None => {}
        }
        self.memo.insert(a.clone(), Mark::Active);
        let overflow = || OracleError::ResourceLimit("derivation tree count exceeds 128 bits".into());
        let mut sum = Multiplicity::Finite(u128::from(self.leaves.contains(a)));
        for body in self.edges.get(a).map(Vec::as_slice).unwrap_or(&[]) {
            let mut product = Multiplicity::Finite(1);
            for b in body {
                product = match (product, self.count(b)?) {
                    (Multiplicity::Finite(x), Multiplicity::Finite(y)) => {
                        Multiplicity::Finite(x.checked_mul(y).ok_or_else(overflow)?)
                    }
                    _ => Multiplicity::Infinite,
                };
            }
            sum = match (sum, product) {
                (Multiplicity::Finite(x), Multiplicity::Finite(y)) => Multiplicity::Finite(x.checked_add(y).ok_or_else(overflow)?),
                _ => Multiplicity::Infinite,
            };
        }
        self.memo.insert(a.clone(), Mark::Done(sum));
        Ok(sum)
    }
}
