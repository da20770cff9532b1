use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::stratify::{recursion_violations, strata_of};
use super::{arities_of, Atom, Builtin, DTerm, DatalogError, Program, Rule, Value};
use crate::rdf::{FactBase, Term};
use crate::sparql::Expr;

pub const DEFAULT_MAX_DERIVATIONS: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    SemiNaive,
    Naive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Upper bound on the number of stored ground atoms.
    pub max_derivations: u64,
    pub strategy: Strategy,
    /// Reject programs whose recursive rules build Skolem identifiers.
    pub enforce_recursion_audit: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { max_derivations: DEFAULT_MAX_DERIVATIONS, strategy: Strategy::SemiNaive, enforce_recursion_audit: true }
    }
}

/// Handle of an interned ground value inside one [`DerivedFacts`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueId(u32);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Term(Term),
    Nil,
    Skolem(u32, Box<[ValueId]>),
}

#[derive(Default)]
struct Interner {
    nodes: Vec<Node>,
    map: HashMap<Node, ValueId>,
    tags: Vec<String>,
    tag_map: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, n: Node) -> ValueId {
        if let Some(&id) = self.map.get(&n) {
            return id;
        }
        let id = ValueId(self.nodes.len() as u32);
        self.nodes.push(n.clone());
        self.map.insert(n, id);
        id
    }

    fn tag(&mut self, t: &str) -> u32 {
        if let Some(&i) = self.tag_map.get(t) {
            return i;
        }
        let i = self.tags.len() as u32;
        self.tags.push(t.to_string());
        self.tag_map.insert(t.to_string(), i);
        i
    }

    fn term(&mut self, t: &Term) -> ValueId {
        self.intern(Node::Term(t.clone()))
    }

    fn value(&mut self, v: &Value) -> ValueId {
        match v {
            Value::Term(t) => self.term(t),
            Value::Nil => self.intern(Node::Nil),
            Value::Skolem(s) => {
                let tag = self.tag(&s.tag);
                let args: Box<[ValueId]> = s.args.iter().map(|a| self.value(a)).collect();
                self.intern(Node::Skolem(tag, args))
            }
        }
    }

    /// Looks up a value without interning it.
    fn find(&self, v: &Value) -> Option<ValueId> {
        let node = match v {
            Value::Term(t) => Node::Term(t.clone()),
            Value::Nil => Node::Nil,
            Value::Skolem(s) => {
                let tag = *self.tag_map.get(&s.tag)?;
                Node::Skolem(tag, s.args.iter().map(|a| self.find(a)).collect::<Option<_>>()?)
            }
        };
        self.map.get(&node).copied()
    }

    fn to_value(&self, id: ValueId) -> Value {
        match &self.nodes[id.0 as usize] {
            Node::Term(t) => Value::Term(t.clone()),
            Node::Nil => Value::Nil,
            Node::Skolem(tag, args) => Value::skolem(self.tags[*tag as usize].clone(), args.iter().map(|a| self.to_value(*a)).collect()),
        }
    }

    fn as_term(&self, id: ValueId) -> Option<&Term> {
        match &self.nodes[id.0 as usize] {
            Node::Term(t) => Some(t),
            _ => None,
        }
    }
}

struct Relation {
    arity: usize,
    data: Vec<ValueId>,
    count: usize,
    set: HashSet<Box<[ValueId]>>,
    indexes: HashMap<u64, HashMap<Box<[ValueId]>, Vec<u32>>>,
}

impl Relation {
    fn new(arity: usize) -> Relation {
        Relation { arity, data: vec![], count: 0, set: HashSet::new(), indexes: HashMap::new() }
    }

    fn row(&self, i: usize) -> &[ValueId] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    fn key(row: &[ValueId], mask: u64) -> Box<[ValueId]> {
        row.iter().enumerate().filter(|(c, _)| mask >> c & 1 == 1).map(|(_, v)| *v).collect()
    }

    fn insert(&mut self, t: &[ValueId]) -> bool {
        if self.set.contains(t) {
            return false;
        }
        let i = self.count as u32;
        self.set.insert(t.into());
        self.data.extend_from_slice(t);
        self.count += 1;
        for (mask, idx) in self.indexes.iter_mut() {
            idx.entry(Relation::key(t, *mask)).or_default().push(i);
        }
        true
    }

    fn ensure_index(&mut self, mask: u64) {
        if mask == 0 || self.indexes.contains_key(&mask) {
            return;
        }
        let mut idx: HashMap<Box<[ValueId]>, Vec<u32>> = HashMap::new();
        for i in 0..self.count {
            idx.entry(Relation::key(self.row(i), mask)).or_default().push(i as u32);
        }
        self.indexes.insert(mask, idx);
    }
}

#[derive(Clone, Debug)]
enum CTerm {
    Const(ValueId),
    Var(usize),
    Skolem(u32, Vec<CTerm>),
}

impl CTerm {
    fn ready(&self, bound: &[bool]) -> bool {
        match self {
            CTerm::Const(_) => true,
            CTerm::Var(v) => bound[*v],
            CTerm::Skolem(_, args) => args.iter().all(|a| a.ready(bound)),
        }
    }

    fn eval(&self, b: &[ValueId], interner: &mut Interner) -> ValueId {
        match self {
            CTerm::Const(c) => *c,
            CTerm::Var(v) => b[*v],
            CTerm::Skolem(tag, args) => {
                let args: Box<[ValueId]> = args.iter().map(|a| a.eval(b, interner)).collect();
                interner.intern(Node::Skolem(*tag, args))
            }
        }
    }

    fn first_unbound(&self, bound: &[bool]) -> Option<usize> {
        match self {
            CTerm::Const(_) => None,
            CTerm::Var(v) => (!bound[*v]).then_some(*v),
            CTerm::Skolem(_, args) => args.iter().find_map(|a| a.first_unbound(bound)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Range {
    Full,
    Old,
    Delta,
}

#[derive(Debug)]
enum Step {
    Scan { rel: usize, range: Range, mask: u64, key: Vec<CTerm>, binds: Vec<(usize, usize)>, checks: Vec<(usize, usize)> },
    Assign(usize, CTerm),
    Equal(CTerm, CTerm),
    Differ(CTerm, CTerm),
    Filter(Expr, Vec<(String, usize)>),
    Absent(usize, Vec<CTerm>),
}

#[derive(Debug)]
struct Plan {
    steps: Vec<Step>,
    head_rel: usize,
    head: Vec<CTerm>,
    slots: usize,
}

struct Engine {
    interner: Interner,
    rels: Vec<Relation>,
    names: BTreeMap<String, usize>,
    total: u64,
    max: u64,
}

/// Conversion of one rule into slot-based form.
struct Compiled {
    vars: BTreeMap<String, usize>,
    head: Vec<CTerm>,
    positive: Vec<(usize, Vec<CTerm>)>,
    negative: Vec<(usize, Vec<CTerm>)>,
    builtins: Vec<CBuiltin>,
}

enum CBuiltin {
    Eq(CTerm, CTerm),
    Ne(CTerm, CTerm),
    Filter(Expr, Vec<(String, usize)>),
}

impl Engine {
    fn rel(&mut self, pred: &str, arity: usize) -> usize {
        if let Some(&i) = self.names.get(pred) {
            return i;
        }
        let i = self.rels.len();
        self.rels.push(Relation::new(arity));
        self.names.insert(pred.to_string(), i);
        i
    }

    fn cterm(&mut self, t: &DTerm, vars: &mut BTreeMap<String, usize>) -> CTerm {
        match t {
            DTerm::Const(v) => CTerm::Const(self.interner.value(v)),
            DTerm::Var(name) => {
                let n = vars.len();
                CTerm::Var(*vars.entry(name.clone()).or_insert(n))
            }
            DTerm::Skolem { tag, args } => {
                let tag = self.interner.tag(tag);
                CTerm::Skolem(tag, args.iter().map(|a| self.cterm(a, vars)).collect())
            }
        }
    }

    fn atom(&mut self, a: &Atom, vars: &mut BTreeMap<String, usize>) -> (usize, Vec<CTerm>) {
        let rel = self.rel(&a.predicate, a.arity());
        (rel, a.args.iter().map(|t| self.cterm(t, vars)).collect())
    }

    fn compile(&mut self, r: &Rule) -> Compiled {
        let mut vars = BTreeMap::new();
        let positive = r.positive.iter().map(|a| self.atom(a, &mut vars)).collect();
        let head = r.head.args.iter().map(|t| self.cterm(t, &mut vars)).collect();
        let negative = r.negative.iter().map(|a| self.atom(a, &mut vars)).collect();
        let builtins = r
            .builtins
            .iter()
            .map(|b| match b {
                Builtin::Eq(a, c) => CBuiltin::Eq(self.cterm(a, &mut vars), self.cterm(c, &mut vars)),
                Builtin::Ne(a, c) => CBuiltin::Ne(self.cterm(a, &mut vars), self.cterm(c, &mut vars)),
                Builtin::Filter(e) => {
                    let names = e
                        .vars()
                        .into_iter()
                        .map(|v| {
                            let n = vars.len();
                            let slot = *vars.entry(v.clone()).or_insert(n);
                            (v, slot)
                        })
                        .collect();
                    CBuiltin::Filter(e.clone(), names)
                }
            })
            .collect();
        Compiled { vars, head, positive, negative, builtins }
    }

    /// Builds an evaluation plan. `ranges[j]` selects which part of the
    /// relation the j-th positive atom reads; `first` is scanned first.
    fn plan(&self, r: &Rule, c: &Compiled, head_rel: usize, ranges: &[Range], first: Option<usize>) -> Result<Plan, DatalogError> {
        let n = c.vars.len();
        let mut bound = vec![false; n];
        let mut steps = Vec::new();
        let mut atom_done = vec![false; c.positive.len()];
        let mut neg_done = vec![false; c.negative.len()];
        let mut bi_done = vec![false; c.builtins.len()];
        loop {
            // Flush every constraint that can run now.
            loop {
                let mut progress = false;
                for (i, b) in c.builtins.iter().enumerate() {
                    if bi_done[i] {
                        continue;
                    }
                    let step = match b {
                        CBuiltin::Eq(x, y) => match (x.ready(&bound), y.ready(&bound)) {
                            (true, true) => Some(Step::Equal(x.clone(), y.clone())),
                            (false, true) => match x {
                                CTerm::Var(v) => {
                                    bound[*v] = true;
                                    Some(Step::Assign(*v, y.clone()))
                                }
                                _ => None,
                            },
                            (true, false) => match y {
                                CTerm::Var(v) => {
                                    bound[*v] = true;
                                    Some(Step::Assign(*v, x.clone()))
                                }
                                _ => None,
                            },
                            (false, false) => None,
                        },
                        CBuiltin::Ne(x, y) => (x.ready(&bound) && y.ready(&bound)).then(|| Step::Differ(x.clone(), y.clone())),
                        CBuiltin::Filter(e, names) => {
                            names.iter().all(|(_, s)| bound[*s]).then(|| Step::Filter(e.clone(), names.clone()))
                        }
                    };
                    if let Some(s) = step {
                        steps.push(s);
                        bi_done[i] = true;
                        progress = true;
                    }
                }
                for (i, (rel, args)) in c.negative.iter().enumerate() {
                    if !neg_done[i] && args.iter().all(|a| a.ready(&bound)) {
                        steps.push(Step::Absent(*rel, args.clone()));
                        neg_done[i] = true;
                        progress = true;
                    }
                }
                if !progress {
                    break;
                }
            }
            let next = match first.filter(|&f| !atom_done[f]) {
                Some(f) => Some(f),
                None => (0..c.positive.len()).filter(|&j| !atom_done[j]).max_by_key(|&j| {
                    let score = c.positive[j].1.iter().filter(|a| a.ready(&bound)).count();
                    (score, std::cmp::Reverse(j))
                }),
            };
            let Some(j) = next else { break };
            atom_done[j] = true;
            let (rel, args) = &c.positive[j];
            let mut mask = 0u64;
            let mut key = Vec::new();
            let mut binds = Vec::new();
            let mut checks = Vec::new();
            let mut local = bound.clone();
            for (col, a) in args.iter().enumerate() {
                if a.ready(&bound) {
                    mask |= 1 << col;
                    key.push(a.clone());
                } else if let CTerm::Var(v) = a {
                    if local[*v] {
                        checks.push((col, *v));
                    } else {
                        local[*v] = true;
                        binds.push((col, *v));
                    }
                } else {
                    return Err(unsafe_rule(r, c, a.first_unbound(&bound)));
                }
            }
            bound = local;
            steps.push(Step::Scan { rel: *rel, range: ranges[j], mask, key, binds, checks });
        }
        if let Some(i) = bi_done.iter().position(|d| !d) {
            let v = match &c.builtins[i] {
                CBuiltin::Eq(x, y) | CBuiltin::Ne(x, y) => x.first_unbound(&bound).or_else(|| y.first_unbound(&bound)),
                CBuiltin::Filter(_, names) => names.iter().find(|(_, s)| !bound[*s]).map(|(_, s)| *s),
            };
            return Err(unsafe_rule(r, c, v));
        }
        if let Some(i) = neg_done.iter().position(|d| !d) {
            let v = c.negative[i].1.iter().find_map(|a| a.first_unbound(&bound));
            return Err(unsafe_rule(r, c, v));
        }
        if let Some(v) = c.head.iter().find_map(|a| a.first_unbound(&bound)) {
            return Err(unsafe_rule(r, c, Some(v)));
        }
        Ok(Plan { steps, head_rel, head: c.head.clone(), slots: n })
    }

    fn prepare_indexes(&mut self, plan: &Plan) {
        for s in &plan.steps {
            if let Step::Scan { rel, mask, .. } = s {
                self.rels[*rel].ensure_index(*mask);
            }
        }
    }

    /// Runs a plan and inserts its head tuples; returns how many were new.
    fn fire(&mut self, plan: &Plan, windows: &[(usize, usize)]) -> Result<usize, DatalogError> {
        let mut out = Vec::new();
        let mut b = vec![ValueId(0); plan.slots];
        let mut x = Exec { rels: &self.rels, interner: &mut self.interner, windows, max: self.max, out: &mut out };
        x.run(plan, 0, &mut b)?;
        let rel = &mut self.rels[plan.head_rel];
        let mut new = 0;
        if rel.arity == 0 {
            if !out.is_empty() && rel.insert(&[]) {
                new += 1;
            }
        } else {
            for t in out.chunks(rel.arity) {
                if rel.insert(t) {
                    new += 1;
                }
            }
        }
        self.total += new as u64;
        if self.total > self.max {
            return Err(limit(self.max));
        }
        Ok(new)
    }
}

fn limit(max: u64) -> DatalogError {
    DatalogError::ResourceLimit(format!("more than {max} ground atoms"))
}

fn unsafe_rule(r: &Rule, c: &Compiled, slot: Option<usize>) -> DatalogError {
    let variable = slot
        .and_then(|s| c.vars.iter().find(|(_, &v)| v == s).map(|(k, _)| k.clone()))
        .unwrap_or_else(|| "?".to_string());
    DatalogError::Unsafe { rule: r.to_string(), variable }
}

struct Exec<'a> {
    rels: &'a [Relation],
    interner: &'a mut Interner,
    windows: &'a [(usize, usize)],
    max: u64,
    out: &'a mut Vec<ValueId>,
}

impl Exec<'_> {
    fn run(&mut self, plan: &Plan, i: usize, b: &mut [ValueId]) -> Result<(), DatalogError> {
        let Some(step) = plan.steps.get(i) else {
            if plan.head.is_empty() {
                // Marker for a derived zero-arity atom.
                if self.out.is_empty() {
                    self.out.push(ValueId(0));
                }
                return Ok(());
            }
            for t in &plan.head {
                let v = t.eval(b, self.interner);
                self.out.push(v);
            }
            if (self.out.len() / plan.head.len()) as u64 > self.max {
                return Err(limit(self.max));
            }
            return Ok(());
        };
        match step {
            Step::Scan { rel, range, mask, key, binds, checks } => {
                let (ds, end) = self.windows[*rel];
                let (lo, hi) = match range {
                    Range::Full => (0, end),
                    Range::Old => (0, ds),
                    Range::Delta => (ds, end),
                };
                if lo >= hi {
                    return Ok(());
                }
                let visit = |this: &mut Self, row: usize, b: &mut [ValueId]| -> Result<(), DatalogError> {
                    let t = this.rels[*rel].row(row);
                    for &(col, v) in binds {
                        b[v] = t[col];
                    }
                    for &(col, v) in checks {
                        if b[v] != t[col] {
                            return Ok(());
                        }
                    }
                    this.run(plan, i + 1, b)
                };
                if *mask == 0 {
                    for row in lo..hi {
                        visit(self, row, b)?;
                    }
                } else {
                    let k: Box<[ValueId]> = key.iter().map(|t| t.eval(b, self.interner)).collect();
                    let rels = self.rels;
                    let Some(list) = rels[*rel].indexes[mask].get(&k) else { return Ok(()) };
                    let a = list.partition_point(|&x| (x as usize) < lo);
                    let z = list.partition_point(|&x| (x as usize) < hi);
                    for &row in &list[a..z] {
                        visit(self, row as usize, b)?;
                    }
                }
                Ok(())
            }
            Step::Assign(v, t) => {
                b[*v] = t.eval(b, self.interner);
                self.run(plan, i + 1, b)
            }
            Step::Equal(x, y) => {
                if x.eval(b, self.interner) == y.eval(b, self.interner) {
                    self.run(plan, i + 1, b)
                } else {
                    Ok(())
                }
            }
            Step::Differ(x, y) => {
                if x.eval(b, self.interner) != y.eval(b, self.interner) {
                    self.run(plan, i + 1, b)
                } else {
                    Ok(())
                }
            }
            Step::Filter(e, names) => {
                let interner = &*self.interner;
                let ok = e.holds(&mut |name: &str| {
                    names
                        .iter()
                        .find(|(n, _)| n == name)
                        .and_then(|(_, s)| interner.as_term(b[*s]).cloned())
                        .unwrap_or(Term::Unbound)
                });
                if ok {
                    self.run(plan, i + 1, b)
                } else {
                    Ok(())
                }
            }
            Step::Absent(rel, args) => {
                let t: Vec<ValueId> = args.iter().map(|a| a.eval(b, self.interner)).collect();
                if self.rels[*rel].set.contains(t.as_slice()) {
                    Ok(())
                } else {
                    self.run(plan, i + 1, b)
                }
            }
        }
    }
}

/// Ground atoms derived by [`evaluate`], with interned values.
pub struct DerivedFacts {
    interner: Interner,
    rels: Vec<Relation>,
    names: BTreeMap<String, usize>,
}

impl DerivedFacts {
    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.names.keys().map(String::as_str)
    }

    /// Number of atoms of `pred`.
    pub fn len(&self, pred: &str) -> usize {
        self.names.get(pred).map_or(0, |&i| self.rels[i].count)
    }

    pub fn total(&self) -> usize {
        self.rels.iter().map(|r| r.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Tuples of `pred` as value handles, in derivation order.
    pub fn rows(&self, pred: &str) -> impl Iterator<Item = &[ValueId]> {
        let rel = self.names.get(pred).map(|&i| &self.rels[i]);
        let n = rel.map_or(0, |r| r.count);
        (0..n).map(move |i| rel.map_or(&[][..], |r| r.row(i)))
    }

    pub fn value(&self, id: ValueId) -> Value {
        self.interner.to_value(id)
    }

    /// The RDF term behind a handle, if it is one.
    pub fn term(&self, id: ValueId) -> Option<&Term> {
        self.interner.as_term(id)
    }

    pub fn tuples(&self, pred: &str) -> Vec<Vec<Value>> {
        self.rows(pred).map(|r| r.iter().map(|&v| self.value(v)).collect()).collect()
    }

    pub fn contains(&self, pred: &str, args: &[Value]) -> bool {
        let Some(&i) = self.names.get(pred) else { return false };
        let Some(ids) = args.iter().map(|a| self.interner.find(a)).collect::<Option<Vec<_>>>() else { return false };
        self.rels[i].set.contains(ids.as_slice())
    }

    /// Every stored atom, sorted.
    pub fn facts(&self) -> BTreeSet<(String, Vec<Value>)> {
        let mut out = BTreeSet::new();
        for name in self.names.keys() {
            for t in self.tuples(name) {
                out.insert((name.clone(), t));
            }
        }
        out
    }
}

impl std::fmt::Debug for DerivedFacts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DerivedFacts").field("atoms", &self.total()).finish()
    }
}

pub fn evaluate(p: &Program, fb: &FactBase) -> Result<DerivedFacts, DatalogError> {
    evaluate_with(p, fb, &EvalOptions::default())
}

/// Stratum-by-stratum least fixpoint of `p` together with the facts and
/// rules of `fb`.
pub fn evaluate_with(p: &Program, fb: &FactBase, opts: &EvalOptions) -> Result<DerivedFacts, DatalogError> {
    let mut seen = HashSet::new();
    let rules: Vec<Rule> = fb.rules.iter().chain(&p.rules).filter(|r| seen.insert(*r)).cloned().collect();
    let arities = arities_of(rules.iter())?;
    for f in &fb.facts {
        if let Some(&n) = arities.get(&f.predicate) {
            if n != f.args.len() {
                return Err(DatalogError::ArityMismatch { predicate: f.predicate.clone(), expected: n, found: f.args.len() });
            }
        }
    }
    if opts.enforce_recursion_audit {
        if let Some(&i) = recursion_violations(&rules).first() {
            return Err(DatalogError::RecursiveSkolem(rules[i].to_string()));
        }
    }
    let strata = strata_of(&rules)?;

    let mut e = Engine { interner: Interner::default(), rels: vec![], names: BTreeMap::new(), total: 0, max: opts.max_derivations };
    for (pred, &n) in &arities {
        e.rel(pred, n);
    }
    for f in &fb.facts {
        let rel = e.rel(&f.predicate, f.args.len());
        if e.rels[rel].arity != f.args.len() {
            return Err(DatalogError::ArityMismatch {
                predicate: f.predicate.clone(),
                expected: e.rels[rel].arity,
                found: f.args.len(),
            });
        }
        let t: Vec<ValueId> = f.args.iter().map(|a| e.interner.term(a)).collect();
        if e.rels[rel].insert(&t) {
            e.total += 1;
        }
    }
    if e.total > e.max {
        return Err(limit(e.max));
    }

    let compiled: Vec<Compiled> = rules.iter().map(|r| e.compile(r)).collect();
    let level: BTreeMap<&str, usize> =
        strata.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |p| (p.as_str(), i))).collect();
    for (si, stratum) in strata.iter().enumerate() {
        let members: Vec<usize> = (0..rules.len()).filter(|&i| level[rules[i].head.predicate.as_str()] == si).collect();
        if members.is_empty() {
            continue;
        }
        let in_stratum: HashSet<usize> = stratum.iter().map(|p| e.names[p]).collect();
        let full_plans: Vec<Plan> = members
            .iter()
            .map(|&i| {
                let head_rel = e.names[&rules[i].head.predicate];
                e.plan(&rules[i], &compiled[i], head_rel, &vec![Range::Full; rules[i].positive.len()], None)
            })
            .collect::<Result<_, _>>()?;
        let mut windows: Vec<(usize, usize)> = e.rels.iter().map(|r| (r.count, r.count)).collect();
        for plan in &full_plans {
            e.prepare_indexes(plan);
        }
        match opts.strategy {
            Strategy::Naive => loop {
                for (w, r) in windows.iter_mut().zip(&e.rels) {
                    *w = (r.count, r.count);
                }
                let mut new = 0;
                for plan in &full_plans {
                    new += e.fire(plan, &windows)?;
                }
                if new == 0 {
                    break;
                }
            },
            Strategy::SemiNaive => {
                let mut delta_plans = Vec::new();
                for &i in &members {
                    let r = &rules[i];
                    let head_rel = e.names[&r.head.predicate];
                    let recursive: Vec<usize> = (0..r.positive.len())
                        .filter(|&j| in_stratum.contains(&e.names[&r.positive[j].predicate]))
                        .collect();
                    for &k in &recursive {
                        let ranges: Vec<Range> = (0..r.positive.len())
                            .map(|j| {
                                if j == k {
                                    Range::Delta
                                } else if j < k && recursive.contains(&j) {
                                    Range::Old
                                } else {
                                    Range::Full
                                }
                            })
                            .collect();
                        delta_plans.push(e.plan(r, &compiled[i], head_rel, &ranges, Some(k))?);
                    }
                }
                for plan in &delta_plans {
                    e.prepare_indexes(plan);
                }
                for plan in &full_plans {
                    e.fire(plan, &windows)?;
                }
                loop {
                    let mut any = false;
                    for (w, r) in windows.iter_mut().zip(&e.rels) {
                        *w = (w.1, r.count);
                        any |= w.0 < w.1;
                    }
                    if !any || delta_plans.is_empty() {
                        break;
                    }
                    for plan in &delta_plans {
                        e.fire(plan, &windows)?;
                    }
                }
            }
        }
    }
    Ok(DerivedFacts { interner: e.interner, rels: e.rels, names: e.names })
}
