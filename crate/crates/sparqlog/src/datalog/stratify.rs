use std::collections::{BTreeMap, BTreeSet};

use super::{Builtin, DTerm, DatalogError, Program, Rule};

/// Predicate dependency graph: an edge `head -> body` per body literal.
struct DepGraph {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<Vec<(usize, bool)>>,
}

impl DepGraph {
    fn new(rules: &[Rule]) -> DepGraph {
        let mut g = DepGraph { names: vec![], index: BTreeMap::new(), edges: vec![] };
        for r in rules {
            let h = g.node(&r.head.predicate);
            for (p, negated) in r.body_predicates() {
                let b = g.node(p);
                g.edges[h].push((b, negated));
            }
        }
        g
    }

    fn node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.edges.push(vec![]);
        i
    }

    /// Tarjan's algorithm, iterative; components come out dependencies first.
    fn sccs(&self) -> Vec<usize> {
        let n = self.names.len();
        let mut comp = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut num = vec![usize::MAX; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut counter = 0;
        let mut next_comp = 0;
        for root in 0..n {
            if num[root] != usize::MAX {
                continue;
            }
            let mut work = vec![(root, 0usize)];
            num[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&(v, ei)) = work.last() {
                if ei < self.edges[v].len() {
                    let w = self.edges[v][ei].0;
                    work.last_mut().unwrap().1 += 1;
                    if num[w] == usize::MAX {
                        num[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        work.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(num[w]);
                    }
                } else {
                    work.pop();
                    if let Some(&(parent, _)) = work.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == num[v] {
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp[w] = next_comp;
                            if w == v {
                                break;
                            }
                        }
                        next_comp += 1;
                    }
                }
            }
        }
        comp
    }
}

/// Strata of a rule set, lowest first, or the negative cycle that prevents
/// stratification.
pub(crate) fn strata_of(rules: &[Rule]) -> Result<Vec<BTreeSet<String>>, DatalogError> {
    let g = DepGraph::new(rules);
    if g.names.is_empty() {
        return Ok(vec![]);
    }
    let comp = g.sccs();
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    for v in 0..g.names.len() {
        for &(w, negated) in &g.edges[v] {
            if negated && comp[v] == comp[w] {
                let members: Vec<&str> =
                    (0..g.names.len()).filter(|&u| comp[u] == comp[v]).map(|u| g.names[u].as_str()).collect();
                return Err(DatalogError::NotStratifiable(format!(
                    "{} depends negatively on {} within the cycle {{{}}}",
                    g.names[v],
                    g.names[w],
                    members.join(", ")
                )));
            }
        }
    }
    // Components are numbered dependencies first, so one pass suffices.
    let mut members: Vec<Vec<usize>> = vec![vec![]; ncomp];
    for v in 0..g.names.len() {
        members[comp[v]].push(v);
    }
    let mut level = vec![0usize; ncomp];
    for c in 0..ncomp {
        let mut l = 0;
        for &v in &members[c] {
            for &(w, negated) in &g.edges[v] {
                if comp[w] != c {
                    l = l.max(level[comp[w]] + usize::from(negated));
                }
            }
        }
        level[c] = l;
    }
    let top = level.iter().copied().max().unwrap_or(0);
    let mut out = vec![BTreeSet::new(); top + 1];
    for v in 0..g.names.len() {
        out[level[comp[v]]].insert(g.names[v].clone());
    }
    Ok(out.into_iter().filter(|s| !s.is_empty()).collect())
}

/// Splits the predicates of `p` into strata such that every negated
/// dependency points to a strictly lower stratum.
pub fn stratify(p: &Program) -> Result<Vec<BTreeSet<String>>, DatalogError> {
    strata_of(&p.rules)
}

/// Indices of rules that sit on a recursive cycle and create Skolem values.
pub(crate) fn recursion_violations(rules: &[Rule]) -> Vec<usize> {
    let g = DepGraph::new(rules);
    let comp = g.sccs();
    let mut out = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        let h = g.index[&r.head.predicate];
        let recursive = r.body_predicates().any(|(p, _)| comp[g.index[p]] == comp[h]);
        if recursive && creates_skolem(r) {
            out.push(i);
        }
    }
    out
}

fn has_skolem(t: &DTerm) -> bool {
    matches!(t, DTerm::Skolem { .. })
}

fn creates_skolem(r: &Rule) -> bool {
    r.head.args.iter().any(has_skolem)
        || r.builtins.iter().any(|b| match b {
            Builtin::Eq(a, c) => has_skolem(a) || has_skolem(c),
            _ => false,
        })
}

/// Result of checking that recursion never generates fresh identifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionAudit {
    /// Rules on a recursive cycle that build Skolem terms.
    pub violations: Vec<Rule>,
}

impl RecursionAudit {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn audit_recursion(p: &Program) -> RecursionAudit {
    RecursionAudit { violations: recursion_violations(&p.rules).into_iter().map(|i| p.rules[i].clone()).collect() }
}
