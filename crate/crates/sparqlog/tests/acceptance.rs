//! Acceptance checks. Each criterion prints one `[PASS]` or `[FAIL]` line; the
//! process exits with status 1 if any of them fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path as FsPath;
use std::time::{Duration, Instant};

use common::{engine_vs_oracle, ex, id_counts, isomorphic, static_checks, triple, Gen, Outcome, FAMILIES};
use sparqlog::datalog::{
    bagify, check_warded, evaluate, evaluate_with, parse_program, render_program, EvalOptions, Fact, Value,
};
use sparqlog::oracle::{count_derivation_trees, Multiplicity};
use sparqlog::rdf::{parse_ntriples, Dataset, FactBase, Term, Triple};
use sparqlog::solution::{SolutionMapping, SolutionMultiset};
use sparqlog::sparql::{parse_query, Path, Pattern, Projection, Query, QueryForm, TermPattern};
use sparqlog::translator::{translate_query, translate_query_mode};
use sparqlog::{run_query, Answer};

const TESTDATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/testdata");
const FUZZ_QUERIES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fuzz/corpus/parse_query");

type Check = Result<String, String>;

fn file(name: &str) -> String {
    std::fs::read_to_string(FsPath::new(TESTDATA).join(name)).unwrap()
}

fn dataset(name: &str) -> Dataset {
    Dataset::from_triples(parse_ntriples(&file(name)).unwrap())
}

fn solutions(q: &Query, d: &Dataset) -> (SolutionMultiset, Vec<SolutionMapping>) {
    match run_query(q, d, &EvalOptions::default()).unwrap() {
        Answer::Solutions { multiset, sequence } => (multiset, sequence),
        Answer::Boolean(_) => panic!("expected solutions"),
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    if t < limit {
        Ok(t)
    } else {
        Err(format!("took {t:?}, limit {limit:?}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn optional_example() -> Check {
    let start = Instant::now();
    let q = parse_query(&file("people.rq")).map_err(|e| e.to_string())?;
    let (multiset, sequence) = solutions(&q, &dataset("people.nt"));
    let george = SolutionMapping::from_pairs([("N", Term::plain("George")), ("L", Term::plain("Lucas"))]);
    let steven = SolutionMapping::from_pairs([("N", Term::plain("Steven"))]);
    let mut expected = SolutionMultiset::new(vec!["N".into(), "L".into()]);
    expected.add(george.clone(), 1);
    expected.add(steven.clone(), 1);
    ensure(multiset == expected, || format!("got {multiset:?}"))?;
    ensure(sequence == vec![george, steven], || format!("order {sequence:?}"))?;
    Ok(format!("2 solutions, George first, {:?}", within(start, Duration::from_secs(1))?))
}

fn path_example() -> Check {
    let start = Instant::now();
    let q = parse_query(&file("borders.rq")).map_err(|e| e.to_string())?;
    let (multiset, _) = solutions(&q, &dataset("countries.nt"));
    let mut expected = SolutionMultiset::new(vec!["B".into()]);
    for c in ["france", "germany", "austria", "belgium"] {
        expected.add(SolutionMapping::from_pairs([("B", ex(c))]), 1);
    }
    ensure(multiset == expected, || format!("got {multiset:?}"))?;
    Ok(format!("4 countries once each, {:?}", within(start, Duration::from_secs(1))?))
}

fn golden_programs() -> Check {
    let start = Instant::now();
    let cases: [(&str, &str, &[(&str, &str)]); 2] = [
        ("people.rq", "optional_program.dl", &[("ans1", "ans1"), ("ans2", "ans2"), ("ans3", "ans3"), ("ans_opt1", "ans_opt1")]),
        ("borders.rq", "path_program.dl", &[("ans1", "ans1"), ("ans2", "ans2"), ("ans3", "ans4"), ("ans4", "ans8")]),
    ];
    for (query, golden, indices) in cases {
        let q = parse_query(&file(query)).map_err(|e| e.to_string())?;
        let printed = render_program(&translate_query(&q).map_err(|e| e.to_string())?);
        let got = parse_program(&printed).map_err(|e| e.to_string())?;
        let expected = parse_program(&file(golden)).map_err(|e| e.to_string())?;
        let renaming = isomorphic(&expected, &got).ok_or_else(|| format!("{query} does not match {golden}:\n{printed}"))?;
        let want: BTreeMap<String, String> = indices.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        ensure(renaming == want, || format!("{query}: predicate correspondence {renaming:?}"))?;
    }
    Ok(format!("2 programs isomorphic, {:?}", within(start, Duration::from_secs(1))?))
}

fn case_seed(family: usize, distinct: bool, i: usize) -> u64 {
    ((family as u64) << 40) | (u64::from(distinct) << 32) | i as u64
}

fn differential() -> Check {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut cases, mut nonempty, mut duplicates) = (0, 0, 0);
    for (fi, family) in FAMILIES.iter().enumerate() {
        for distinct in [false, true] {
            for i in 0..500 {
                let mut g = Gen::new(case_seed(fi, distinct, i));
                let q = g.family_query(family, distinct);
                if q.pattern.depth() > 4 {
                    return Err(format!("generated query deeper than 4:\n{q}"));
                }
                let d = g.dataset(*family == "graph");
                cases += 1;
                match engine_vs_oracle(&q, &d) {
                    Outcome::Equal(n, dup) => {
                        nonempty += usize::from(n > 0);
                        duplicates += usize::from(dup);
                    }
                    Outcome::Different(diff) => {
                        failures.push(format!("{family} distinct={distinct} seed={}:\n{q}{diff}", case_seed(fi, distinct, i)))
                    }
                }
            }
        }
    }
    ensure(failures.is_empty(), || format!("{} of {cases} cases differ; first:\n{}", failures.len(), failures[0]))?;
    Ok(format!(
        "{cases} cases equal ({nonempty} non-empty, {duplicates} with duplicates), {:?}",
        within(start, Duration::from_secs(300))?
    ))
}

fn path_graphs() -> Vec<(&'static str, Vec<Triple>)> {
    let n = ex;
    vec![
        ("cycle", vec![triple(n("a"), "p", n("b")), triple(n("b"), "p", n("c")), triple(n("c"), "p", n("a")), triple(n("c"), "q", n("d"))]),
        ("chain", vec![triple(n("a"), "p", n("b")), triple(n("b"), "p", n("c")), triple(n("c"), "p", n("d")), triple(n("b"), "q", n("d"))]),
        ("diamond", vec![triple(n("a"), "p", n("b")), triple(n("a"), "p", n("c")), triple(n("b"), "p", n("d")), triple(n("c"), "p", n("d")), triple(n("d"), "q", n("a"))]),
        ("self-loop", vec![triple(n("a"), "p", n("a")), triple(n("a"), "q", n("b")), triple(n("b"), "r", n("a"))]),
        ("literal", vec![triple(n("a"), "p", Term::plain("x")), triple(n("b"), "q", n("a")), triple(Term::blank("k"), "p", n("b"))]),
        ("empty", vec![]),
    ]
}

fn endpoints() -> Vec<(TermPattern, TermPattern)> {
    let v = TermPattern::var;
    let c = |s: &str| TermPattern::Term(ex(s));
    vec![
        (v("x"), v("y")),
        (c("a"), v("y")),
        (c("zz"), v("y")),
        (v("x"), c("a")),
        (v("x"), c("zz")),
        (c("a"), c("a")),
        (c("zz"), c("zz")),
        (c("a"), c("b")),
        (v("x"), v("x")),
    ]
}

fn link(p: &str) -> Path {
    Path::link(format!("{}{p}", common::EX))
}

fn path_forms() -> Vec<(&'static str, Vec<Path>)> {
    let iri = |p: &str| format!("{}{p}", common::EX);
    vec![
        ("inverse", vec![Path::inverse(link("p")), Path::inverse(Path::sequence(link("p"), link("q")))]),
        ("sequence", vec![Path::sequence(link("p"), link("p")), Path::sequence(link("p"), Path::inverse(link("q")))]),
        ("alternative", vec![Path::alternative(link("p"), link("q")), Path::alternative(link("p"), link("p"))]),
        ("zero-or-one", vec![Path::zero_or_one(link("p")), Path::zero_or_one(Path::alternative(link("p"), link("q")))]),
        ("one-or-more", vec![Path::one_or_more(link("p")), Path::one_or_more(Path::alternative(link("p"), Path::inverse(link("q"))))]),
        ("zero-or-more", vec![Path::zero_or_more(link("p")), Path::zero_or_more(Path::sequence(link("p"), link("p")))]),
        (
            "negated",
            vec![
                Path::negated(vec![iri("p")], vec![]),
                Path::negated(vec![], vec![iri("p")]),
                Path::negated(vec![iri("q")], vec![iri("p"), iri("r")]),
            ],
        ),
    ]
}

fn path_query(s: &TermPattern, p: &Path, o: &TermPattern) -> Query {
    let mut q = Query::select(&[], Pattern::path(s.clone(), p.clone(), o.clone()));
    q.form = QueryForm::Select(Projection::All);
    q
}

fn multiplicities(q: &Query, d: &Dataset) -> Vec<u64> {
    solutions(q, d).0.iter().map(|(_, c)| c).collect()
}

fn frozen_path_values() -> Result<(), String> {
    let two_cycle = Dataset::from_triples([triple(ex("a"), "p", ex("b")), triple(ex("b"), "p", ex("a"))]);
    let v = TermPattern::var;
    let star = path_query(&v("x"), &Path::zero_or_more(link("p")), &v("y"));
    let (ms, _) = solutions(&star, &two_cycle);
    ensure(ms.len() == 4 && ms.iter().all(|(_, c)| c == 1), || format!("2-cycle p*: {ms:?}"))?;
    let absent = path_query(&TermPattern::Term(ex("zz")), &Path::zero_or_more(link("p")), &v("y"));
    let (ms, _) = solutions(&absent, &two_cycle);
    let only = SolutionMapping::from_pairs([("y", ex("zz"))]);
    ensure(ms.len() == 1 && ms.multiplicity(&only) == 1, || format!("absent anchor: {ms:?}"))?;
    let chain = Dataset::from_triples(path_graphs().swap_remove(1).1);
    let plus = path_query(&TermPattern::Term(ex("a")), &Path::one_or_more(link("p")), &v("y"));
    let got: Vec<Term> = solutions(&plus, &chain).0.iter().map(|(m, _)| m.get("y").clone()).collect();
    ensure(got == vec![ex("b"), ex("c"), ex("d")], || format!("chain a p+: {got:?}"))
}

fn path_suite() -> Check {
    let start = Instant::now();
    frozen_path_values()?;
    let mut per_form = Vec::new();
    for (form, paths) in path_forms() {
        let mut n = 0;
        for path in &paths {
            for (_, triples) in path_graphs() {
                let d = Dataset::from_triples(triples);
                for (s, o) in endpoints() {
                    let q = path_query(&s, path, &o);
                    if let Outcome::Different(diff) = engine_vs_oracle(&q, &d) {
                        return Err(format!("{form}:\n{q}{diff}"));
                    }
                    if matches!(form, "zero-or-one" | "one-or-more" | "zero-or-more") {
                        ensure(multiplicities(&q, &d).iter().all(|&c| c == 1), || format!("duplicates for\n{q}"))?;
                    }
                    n += 1;
                }
            }
        }
        ensure(n >= 20, || format!("only {n} cases for {form}"))?;
        per_form.push(format!("{form} {n}"));
    }
    Ok(format!("{}, {:?}", per_form.join(", "), within(start, Duration::from_secs(60))?))
}

/// Queries from the checked-in fuzz corpus that parse.
fn corpus_queries() -> Vec<Query> {
    let mut out = Vec::new();
    if let Ok(dir) = std::fs::read_dir(FUZZ_QUERIES) {
        let mut paths: Vec<_> = dir.filter_map(|e| e.ok()).map(|e| e.path()).collect();
        paths.sort();
        for p in paths {
            if let Some(q) = std::fs::read_to_string(&p).ok().and_then(|t| parse_query(&t).ok()) {
                out.push(q);
            }
        }
    }
    out
}

fn union_of(q: &Query) -> Query {
    let mut u = q.clone();
    u.pattern = Pattern::union(q.pattern.clone(), q.pattern.clone());
    u
}

fn bag_invariants() -> Check {
    let start = Instant::now();
    let mut queries: Vec<(Query, Dataset)> = Vec::new();
    let corpus = corpus_queries();
    ensure(!corpus.is_empty(), || format!("no queries under {FUZZ_QUERIES}"))?;
    for (i, q) in corpus.into_iter().enumerate() {
        let d = Gen::new(7000 + i as u64).dataset(true);
        queries.push((q, d));
    }
    for i in 0..400 {
        let mut g = Gen::new(9000 + i);
        let family = FAMILIES[i as usize % FAMILIES.len()];
        let q = g.family_query(family, false);
        queries.push((q, g.dataset(true)));
    }
    let mut checked = 0;
    for (q, d) in &queries {
        if !matches!(q.form, QueryForm::Select(_)) || q.is_distinct() {
            continue;
        }
        let mut bag = q.clone();
        bag.modifiers = Default::default();
        let (base, _) = solutions(&bag, d);
        let (doubled, _) = solutions(&union_of(&bag), d);
        let twice = base.iter().all(|(m, c)| doubled.multiplicity(m) == 2 * c) && doubled.len() == 2 * base.len();
        ensure(twice, || format!("P UNION P does not double for\n{bag}"))?;
        let (set, _) = solutions(&bag.clone().distinct(true), d);
        ensure(set == base.distinct(), || format!("DISTINCT is not the support for\n{bag}"))?;
        checked += 1;
    }
    let mut stars = 0;
    for i in 0..300 {
        let mut g = Gen::new(12000 + i);
        let inner = g.path(3);
        let d = g.dataset(false);
        for (s, o) in endpoints() {
            let q = path_query(&s, &Path::zero_or_more(inner.clone()), &o);
            ensure(multiplicities(&q, &d).iter().all(|&c| c == 1), || format!("duplicates for\n{q}"))?;
            stars += 1;
        }
    }
    Ok(format!("{checked} queries, {stars} closure queries, {:?}", start.elapsed()))
}

fn derivation_trees() -> Check {
    let start = Instant::now();
    let cap = EvalOptions { max_derivations: 50_000, enforce_recursion_audit: false, ..EvalOptions::default() };
    let (mut finite, mut infinite, mut atoms) = (0, 0, 0);
    let mut seed = 0;
    while finite < 100 {
        seed += 1;
        if seed > 2000 {
            return Err(format!("only {finite} programs with finite counts after 2000 attempts"));
        }
        let p = Gen::new(50_000 + seed).program();
        let bag = bagify(&p);
        ensure(check_warded(&bag).is_warded, || format!("bagified program not warded:\n{}", render_program(&bag)))?;
        let plain = evaluate(&p, &FactBase::empty()).map_err(|e| e.to_string())?;
        let mut counts = BTreeMap::new();
        let mut unbounded = false;
        for pred in p.predicates() {
            for t in plain.tuples(&pred) {
                let args: Vec<Term> = t.iter().map(|v| v.as_term().unwrap().clone()).collect();
                let m = count_derivation_trees(&p, &FactBase::empty(), &Fact::new(pred.clone(), args))
                    .map_err(|e| e.to_string())?;
                match m {
                    Multiplicity::Finite(n) => {
                        counts.insert((pred.clone(), t), n);
                    }
                    Multiplicity::Infinite => unbounded = true,
                }
            }
        }
        let result = evaluate_with(&bag, &FactBase::empty(), &cap);
        if unbounded {
            infinite += 1;
            ensure(matches!(&result, Err(e) if common::is_resource_limit(e)), || {
                format!("infinite counts but evaluation gave {:?}\n{}", result.as_ref().map(|_| ()), render_program(&p))
            })?;
            continue;
        }
        let total: u128 = counts.values().sum();
        let df = match result {
            Ok(df) => df,
            Err(e) if common::is_resource_limit(&e) && total > u128::from(cap.max_derivations) => continue,
            Err(e) => return Err(format!("{e}\n{}", render_program(&p))),
        };
        let mut got: BTreeMap<(String, Vec<Value>), u128> = BTreeMap::new();
        for pred in p.predicates() {
            for (t, n) in id_counts(df.tuples(&pred)) {
                got.insert((pred.clone(), t), n);
            }
        }
        ensure(got == counts, || format!("counts differ for\n{}", render_program(&p)))?;
        finite += 1;
        atoms += counts.len();
    }
    Ok(format!(
        "{finite} programs ({atoms} atoms) match, {infinite} with infinite counts hit the cap, {:?}",
        within(start, Duration::from_secs(120))?
    ))
}

fn static_guarantees() -> Check {
    let start = Instant::now();
    let mut queries: Vec<Query> = corpus_queries();
    for name in ["people.rq", "borders.rq"] {
        queries.push(parse_query(&file(name)).map_err(|e| e.to_string())?);
    }
    for (fi, family) in FAMILIES.iter().enumerate() {
        for distinct in [false, true] {
            for i in 0..500 {
                queries.push(Gen::new(case_seed(fi, distinct, i)).family_query(family, distinct));
            }
        }
    }
    for (_, paths) in path_forms() {
        for p in paths {
            for (s, o) in endpoints() {
                queries.push(path_query(&s, &p, &o));
            }
        }
    }
    let d = Gen::new(1).dataset(true);
    let cap = EvalOptions { max_derivations: 1_000_000, ..EvalOptions::default() };
    let mut programs = 0;
    for q in &queries {
        for distinct in [false, true] {
            let p = translate_query_mode(q, distinct).map_err(|e| format!("{e}\n{q}"))?;
            static_checks(&p).map_err(|e| format!("{e}\n{q}"))?;
            sparqlog::answer_program(&p, &d, &cap).map_err(|e| format!("{e}\n{q}"))?;
            programs += 1;
        }
    }
    Ok(format!("{programs} programs from {} queries, {:?}", queries.len(), start.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("optional example", optional_example),
        ("property path example", path_example),
        ("golden programs", golden_programs),
        ("differential suite", differential),
        ("property path suite", path_suite),
        ("bag invariants", bag_invariants),
        ("derivation tree counts", derivation_trees),
        ("static guarantees", static_guarantees),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => println!("[PASS] criterion {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
