mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use common::{engine_vs_oracle, id_counts, Gen, Outcome, FAMILIES};
use sparqlog::datalog::{
    bagify, check_warded, evaluate, evaluate_with, parse_program, render_program, EvalOptions, Fact, Strategy as Evaluation,
};
use sparqlog::oracle::{count_derivation_trees, Multiplicity};
use sparqlog::rdf::{parse_ntriples, serialize_ntriples, translate_data, FactBase, Term, Triple};
use sparqlog::solution::{apply_modifiers, parse_tsv, serialize, Format};
use sparqlog::sparql::{index_patterns, parse_query};
use sparqlog::translator::translate_query;
use sparqlog::{run_query, Answer};

fn literal() -> impl Strategy<Value = Term> {
    let text = "[a-zA-Z0-9 \"\\\\\t\n\r\u{e9}\u{1F600}]{0,8}";
    prop_oneof![
        text.prop_map(Term::plain),
        (text, "[a-z]{1,3}(-[A-Z]{2})?").prop_map(|(l, t)| Term::lang_literal(l, t)),
        any::<i32>().prop_map(|n| Term::integer(n.into())),
        (text, "[a-z]{1,5}").prop_map(|(l, d)| Term::typed(l, format!("http://ex.org/{d}"))),
    ]
}

fn node() -> impl Strategy<Value = Term> {
    prop_oneof![
        "[a-z0-9/#]{1,6}".prop_map(|s| Term::iri(format!("http://ex.org/{s}"))),
        "[A-Za-z][A-Za-z0-9_]{0,4}".prop_map(Term::blank),
    ]
}

fn rdf_triple() -> impl Strategy<Value = Triple> {
    (node(), "[a-z]{1,4}", prop_oneof![node(), literal()])
        .prop_map(|(s, p, o)| Triple::new(s, Term::iri(format!("http://ex.org/{p}")), o).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engine_matches_direct_evaluation(seed in any::<u64>(), family in 0..FAMILIES.len(), distinct in any::<bool>()) {
        let mut g = Gen::new(seed);
        let q = g.family_query(FAMILIES[family], distinct);
        let d = g.dataset(FAMILIES[family] == "graph");
        if let Outcome::Different(diff) = engine_vs_oracle(&q, &d) {
            prop_assert!(false, "{}\n{}", q, diff);
        }
    }

    #[test]
    fn ntriples_roundtrip(triples in proptest::collection::vec(rdf_triple(), 0..12)) {
        let text = serialize_ntriples(&triples);
        prop_assert_eq!(parse_ntriples(&text).unwrap(), triples);
    }

    #[test]
    fn queries_reparse(seed in any::<u64>(), family in 0..FAMILIES.len(), distinct in any::<bool>()) {
        let q = Gen::new(seed).family_query(FAMILIES[family], distinct);
        let text = q.to_string();
        let parsed = parse_query(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(parsed, index_patterns(q));
    }

    #[test]
    fn translated_programs_reparse(seed in any::<u64>(), family in 0..FAMILIES.len(), distinct in any::<bool>()) {
        let q = Gen::new(seed).family_query(FAMILIES[family], distinct);
        let p = translate_query(&q).unwrap();
        let text = render_program(&p);
        let parsed = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&parsed, &p);
        prop_assert_eq!(render_program(&parsed), text);
    }

    #[test]
    fn random_programs_reparse(seed in any::<u64>()) {
        let p = Gen::new(seed).program();
        prop_assert_eq!(parse_program(&render_program(&p)).unwrap(), p.clone());
        let b = bagify(&p);
        prop_assert_eq!(parse_program(&render_program(&b)).unwrap(), b);
    }

    #[test]
    fn tsv_roundtrip(seed in any::<u64>(), family in 0..FAMILIES.len()) {
        let mut g = Gen::new(seed);
        let q = g.family_query(FAMILIES[family], false);
        let d = g.dataset(true);
        let Answer::Solutions { multiset, .. } = run_query(&q, &d, &EvalOptions::default()).unwrap() else {
            unreachable!()
        };
        let seq = apply_modifiers(&multiset, &q.modifiers);
        let text = serialize(&seq, &multiset.vars, Format::Tsv);
        prop_assert_eq!(parse_tsv(&text).unwrap(), multiset);
    }

    #[test]
    fn naive_and_semi_naive_agree(seed in any::<u64>(), family in 0..FAMILIES.len(), distinct in any::<bool>()) {
        let mut g = Gen::new(seed);
        let q = g.family_query(FAMILIES[family], distinct);
        let fb = translate_data(&g.dataset(true));
        let p = translate_query(&q).unwrap();
        let semi = evaluate(&p, &fb).unwrap();
        let naive = evaluate_with(&p, &fb, &EvalOptions { strategy: Evaluation::Naive, ..EvalOptions::default() }).unwrap();
        prop_assert_eq!(semi.facts(), naive.facts());
    }

    #[test]
    fn bag_transformation_counts_derivation_trees(seed in any::<u64>()) {
        let p = Gen::new(seed).program();
        let bag = bagify(&p);
        prop_assert!(check_warded(&bag).is_warded);
        let plain = evaluate(&p, &FactBase::empty()).unwrap();
        let opts = EvalOptions { max_derivations: 20_000, enforce_recursion_audit: false, ..EvalOptions::default() };
        let mut expected = BTreeMap::new();
        let mut infinite = false;
        for pred in p.predicates() {
            for t in plain.tuples(&pred) {
                let args = t.iter().map(|v| v.as_term().unwrap().clone()).collect();
                match count_derivation_trees(&p, &FactBase::empty(), &Fact::new(pred.clone(), args)).unwrap() {
                    Multiplicity::Finite(n) => { expected.insert((pred.clone(), t), n); }
                    Multiplicity::Infinite => infinite = true,
                }
            }
        }
        match evaluate_with(&bag, &FactBase::empty(), &opts) {
            Ok(df) => {
                prop_assert!(!infinite);
                let mut got = BTreeMap::new();
                for pred in p.predicates() {
                    for (t, n) in id_counts(df.tuples(&pred)) {
                        got.insert((pred.clone(), t), n);
                    }
                }
                prop_assert_eq!(got, expected);
            }
            Err(e) => {
                prop_assert!(common::is_resource_limit(&e));
                prop_assert!(infinite || expected.values().sum::<u128>() > 20_000);
            }
        }
    }
}
