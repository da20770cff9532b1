use std::collections::{BTreeMap, BTreeSet};

use super::{Builtin, DTerm, Program, Rule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WardednessReport {
    pub affected_positions: BTreeSet<(String, usize)>,
    /// Dangerous variables per rule index (rules without any are omitted).
    pub dangerous_vars: BTreeMap<usize, BTreeSet<String>>,
    pub is_warded: bool,
    /// Index of the first rule violating the ward condition.
    pub witness: Option<usize>,
}

fn skolem_vars(r: &Rule) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for b in &r.builtins {
        if let Builtin::Eq(a, c) = b {
            match (a, c) {
                (DTerm::Var(v), DTerm::Skolem { .. }) | (DTerm::Skolem { .. }, DTerm::Var(v)) => {
                    out.insert(v.clone());
                }
                _ => {}
            }
        }
    }
    out
}

fn aliases(r: &Rule) -> Vec<(String, String)> {
    r.builtins
        .iter()
        .filter_map(|b| match b {
            Builtin::Eq(DTerm::Var(a), DTerm::Var(c)) => Some((a.clone(), c.clone())),
            _ => None,
        })
        .collect()
}

/// Positions (predicate, argument index) of positive body occurrences per
/// variable.
fn occurrences(r: &Rule) -> BTreeMap<String, Vec<(String, usize)>> {
    let mut out: BTreeMap<String, Vec<(String, usize)>> = BTreeMap::new();
    for a in &r.positive {
        for (i, t) in a.args.iter().enumerate() {
            if let DTerm::Var(v) = t {
                out.entry(v.clone()).or_default().push((a.predicate.clone(), i));
            }
        }
    }
    out
}

/// Whether `v` only ever receives values from affected positions.
fn only_affected(
    v: &str,
    occ: &BTreeMap<String, Vec<(String, usize)>>,
    aliases: &[(String, String)],
    skolem: &BTreeSet<String>,
    affected: &BTreeSet<(String, usize)>,
) -> bool {
    let mut seen = BTreeSet::new();
    let mut todo = vec![v.to_string()];
    let mut found_source = false;
    while let Some(x) = todo.pop() {
        if !seen.insert(x.clone()) {
            continue;
        }
        if skolem.contains(&x) {
            found_source = true;
            continue;
        }
        if let Some(ps) = occ.get(&x) {
            if ps.iter().any(|p| !affected.contains(p)) {
                return false;
            }
            found_source = true;
        }
        for (a, b) in aliases {
            if *a == x {
                todo.push(b.clone());
            } else if *b == x {
                todo.push(a.clone());
            }
        }
    }
    found_source
}

/// Computes affected positions, dangerous variables and the ward condition.
pub fn check_warded(p: &Program) -> WardednessReport {
    let mut affected: BTreeSet<(String, usize)> = BTreeSet::new();
    let info: Vec<_> = p.rules.iter().map(|r| (skolem_vars(r), aliases(r), occurrences(r))).collect();
    for (r, (skolem, _, occ)) in p.rules.iter().zip(&info) {
        for (i, t) in r.head.args.iter().enumerate() {
            let existential = match t {
                DTerm::Skolem { .. } => true,
                DTerm::Var(v) => skolem.contains(v) || (!occ.contains_key(v) && !r.builtins.iter().any(|b| b.vars().contains(v))),
                DTerm::Const(_) => false,
            };
            if existential {
                affected.insert((r.head.predicate.clone(), i));
            }
        }
    }
    loop {
        let mut changed = false;
        for (r, (skolem, al, occ)) in p.rules.iter().zip(&info) {
            for (i, t) in r.head.args.iter().enumerate() {
                let key = (r.head.predicate.clone(), i);
                if affected.contains(&key) {
                    continue;
                }
                if let DTerm::Var(v) = t {
                    if only_affected(v, occ, al, skolem, &affected) {
                        affected.insert(key);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut dangerous_vars = BTreeMap::new();
    let mut witness = None;
    for (idx, (r, (skolem, al, occ))) in p.rules.iter().zip(&info).enumerate() {
        // Variables inside a head Skolem term name an existential value and
        // are not propagated.
        let dangerous: BTreeSet<String> = r
            .head
            .args
            .iter()
            .filter_map(DTerm::as_var)
            .filter(|v| !skolem.contains(*v) && occ.contains_key(*v) && only_affected(v, occ, al, skolem, &affected))
            .map(str::to_string)
            .collect();
        if dangerous.is_empty() {
            continue;
        }
        let harmless = |v: &str| !only_affected(v, occ, al, skolem, &affected);
        let warded = r.positive.iter().enumerate().any(|(wi, ward)| {
            let wvars = ward.vars();
            if !dangerous.iter().all(|d| wvars.contains(d)) {
                return false;
            }
            let mut rest = BTreeSet::new();
            for (j, a) in r.positive.iter().enumerate() {
                if j != wi {
                    rest.extend(a.vars());
                }
            }
            for a in &r.negative {
                rest.extend(a.vars());
            }
            for b in &r.builtins {
                rest.extend(b.vars());
            }
            wvars.iter().filter(|v| rest.contains(*v)).all(|v| harmless(v))
        });
        if !warded && witness.is_none() {
            witness = Some(idx);
        }
        dangerous_vars.insert(idx, dangerous);
    }
    WardednessReport { affected_positions: affected, dangerous_vars, is_warded: witness.is_none(), witness }
}
