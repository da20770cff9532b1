use std::collections::BTreeSet;

use super::{Atom, DTerm, Program, Rule};

fn fresh(base: &str, taken: &mut BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    taken.insert(name.clone());
    name
}

/// Bag transformation: every intensional predicate gains a leading
/// identifier position, and each rule builds the identifier of its head
/// from its tag and the identifiers of its intensional body atoms. Body atoms
/// over extensional predicates keep their shape; their variables join the
/// identifier so that different ground instances stay apart. Negated
/// intensional atoms go through an identifier-free projection predicate.
pub fn bagify(p: &Program) -> Program {
    let idb: BTreeSet<&str> = p.rules.iter().map(|r| r.head.predicate.as_str()).collect();
    let mut rules = Vec::new();
    let mut aux = Vec::new();
    for (ri, r) in p.rules.iter().enumerate() {
        let mut taken = r.vars();
        let mut ids = Vec::new();
        let mut edb_vars = BTreeSet::new();
        let positive = r
            .positive
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if idb.contains(a.predicate.as_str()) {
                    let z = fresh(&format!("Z{}", i + 1), &mut taken);
                    ids.push(DTerm::var(z.clone()));
                    let mut args = vec![DTerm::var(z)];
                    args.extend(a.args.iter().cloned());
                    Atom::new(a.predicate.clone(), args)
                } else {
                    edb_vars.extend(a.vars());
                    a.clone()
                }
            })
            .collect();
        let mut negative = Vec::new();
        for (i, b) in r.negative.iter().enumerate() {
            if !idb.contains(b.predicate.as_str()) {
                negative.push(b.clone());
                continue;
            }
            let name = format!("aux_{}_{}", ri, i + 1);
            let xs: Vec<DTerm> = b.vars().into_iter().map(DTerm::Var).collect();
            let mut inner_taken = b.vars();
            let w = fresh("W", &mut inner_taken);
            let mut args = vec![DTerm::var(w)];
            args.extend(b.args.iter().cloned());
            aux.push(Rule::new(Atom::new(name.clone(), xs.clone()), vec![Atom::new(b.predicate.clone(), args)]));
            negative.push(Atom::new(name, xs));
        }
        ids.extend(edb_vars.into_iter().map(DTerm::Var));
        let mut head_args = vec![DTerm::skolem(format!("r{ri}"), ids)];
        head_args.extend(r.head.args.iter().cloned());
        rules.push(Rule {
            head: Atom::new(r.head.predicate.clone(), head_args),
            positive,
            negative,
            builtins: r.builtins.clone(),
        });
    }
    rules.extend(aux);
    let goal = p.goal.clone().map(|mut g| {
        g.has_id = idb.contains(g.predicate.as_str());
        g
    });
    Program { rules, goal }
}
