use std::collections::BTreeMap;

use crate::rdf::Term;
use crate::solution::{SolutionMapping, SolutionMultiset};

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub equal: bool,
    /// Share of returned solutions that were expected.
    pub correct_ratio: f64,
    /// Share of expected solutions that were returned.
    pub complete_ratio: f64,
    /// `- ` lines for missing solutions, `+ ` lines for unexpected ones.
    pub diff: Vec<String>,
}

/// Relabels blank nodes: rows are sorted with blank labels masked, then
/// labels are renamed in order of first appearance.
fn canonical_blanks(ms: &SolutionMultiset, vars: &[String]) -> SolutionMultiset {
    let mask = |t: &Term| if t.is_blank() { Term::blank("") } else { t.clone() };
    let mut rows: Vec<Vec<Term>> = Vec::new();
    for (m, c) in ms.iter() {
        for _ in 0..c {
            rows.push(m.values(vars));
        }
    }
    rows.sort_by(|a, b| {
        let ka: Vec<Term> = a.iter().map(mask).collect();
        let kb: Vec<Term> = b.iter().map(mask).collect();
        ka.cmp(&kb).then_with(|| a.cmp(b))
    });
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut out = SolutionMultiset::new(ms.vars.clone());
    for row in rows {
        let mut m = SolutionMapping::new();
        for (v, t) in vars.iter().zip(row) {
            let t = match t {
                Term::Blank(label) => {
                    let next = format!("c{}", names.len());
                    Term::blank(names.entry(label).or_insert(next).clone())
                }
                t => t,
            };
            m.insert(v.clone(), t);
        }
        out.add(m, 1);
    }
    out
}

fn describe(m: &SolutionMapping) -> String {
    let parts: Vec<String> = m.iter().map(|(v, t)| format!("?{v}={t}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Compares `got` against `expected` as multisets.
pub fn compare_multisets(expected: &SolutionMultiset, got: &SolutionMultiset, blank_insensitive: bool) -> CompareReport {
    let mut ve = expected.vars.clone();
    let mut vg = got.vars.clone();
    ve.sort();
    vg.sort();
    let same_schema = ve == vg;
    let (e, g) = if blank_insensitive {
        (canonical_blanks(expected, &ve), canonical_blanks(got, &ve))
    } else {
        (expected.clone(), got.clone())
    };
    let mut common = 0u64;
    let mut diff = Vec::new();
    for (m, c) in e.iter() {
        let other = g.multiplicity(m);
        common += c.min(other);
        if c > other {
            diff.push(format!("- {} x{}", describe(m), c - other));
        }
    }
    for (m, c) in g.iter() {
        let other = e.multiplicity(m);
        if c > other {
            diff.push(format!("+ {} x{}", describe(m), c - other));
        }
    }
    let ratio = |n: u64| if n == 0 { 1.0 } else { common as f64 / n as f64 };
    CompareReport {
        equal: same_schema && diff.is_empty(),
        correct_ratio: ratio(g.len()),
        complete_ratio: ratio(e.len()),
        diff,
    }
}
