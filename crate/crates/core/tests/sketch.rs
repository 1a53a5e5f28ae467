mod common;

use std::collections::BTreeMap;
use std::time::Duration;

use common::sketch_gen::*;
use leanagent_core::lean;
use leanagent_core::sketch::{consolidate, extract_subproblems, parse, print, ShowBody, Step};
use leanagent_core::verifier::{FormalProof, ProofOrigin};
use proptest::prelude::*;

/// Compares against a frozen file; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = fixtures().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name}");
}

#[test]
fn corpus_has_at_least_ten_sketches() {
    assert!(corpus().len() >= 10);
}

#[test]
fn corpus_reprints_match_goldens() {
    for (name, src) in corpus() {
        let ast = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = print(&ast);
        golden(&format!("{name}.golden"), &printed);
        assert_eq!(parse(&printed).unwrap(), ast, "{name}");
        assert_eq!(print(&parse(&printed).unwrap()), printed, "{name}");
    }
}

#[test]
fn corpus_extraction_is_closed_and_complete() {
    let v = elaborator();
    for (name, src) in corpus() {
        let ast = parse(&src).unwrap();
        let subs = extract_subproblems(&ast).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(subs.len(), ast.show_labels().len(), "{name}");
        let listing: String = subs.iter().map(|s| format!("{}\n", s.statement.source)).collect();
        golden(&format!("{name}.subproblems"), &listing);
        for (i, sub) in subs.iter().enumerate() {
            assert_eq!(sub.index, i + 1);
            assert_eq!(sub.name, format!("sub_{}", i + 1));
            assert_eq!(sub.origin_label, ast.show_labels()[i]);
            assert_eq!(unbound_identifiers(&sub.statement), Vec::<String>::new(), "{name}/{}", sub.name);
            let r = v.check_statement(&sub.statement, Duration::from_secs(1)).unwrap();
            assert!(r.ok, "{name}/{}: {:?}", sub.name, r.diagnostics);
        }
    }
}

#[test]
fn corpus_consolidation_matches_goldens() {
    for (name, src) in corpus() {
        let ast = parse(&src).unwrap();
        let proofs = sub_proofs(&ast);
        let out = consolidate(&ast, &proofs).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!lean::contains_placeholder(&out.source), "{name}");
        for p in proofs.values() {
            assert_eq!(out.source.matches(&p.source).count(), 1, "{name}: {}", p.source);
        }
        golden(&format!("{name}.consolidated"), &format!("{}\n", out.source));
    }
}

#[test]
fn minimal_sketch_example() {
    let ast = parse(
        "theorem t (a : ℤ) : a > 0 → a ≥ 0\nsketch t\n  suppose h : a > 0\n  show s1 : a ≥ 0 by sorry\n  conclude\nend",
    )
    .unwrap();
    assert!(ast.concluded);
    assert!(matches!(ast.steps[..], [Step::Suppose { .. }, Step::ShowBy { body: ShowBody::Hole, .. }]));
    let subs = extract_subproblems(&ast).unwrap();
    assert_eq!(subs[0].statement.source, "theorem sub_1 (a : ℤ) (h : a > 0) : a ≥ 0");
    let proofs = BTreeMap::from([("s1".to_string(), FormalProof::new("rfl", ProofOrigin::Direct))]);
    assert_eq!(consolidate(&ast, &proofs).unwrap().source, "intro h\nhave s1 : a ≥ 0 := by rfl\nexact s1");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parse_print_round_trip(ast in sketch_ast()) {
        let printed = print(&ast);
        let reparsed = parse(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(&reparsed, &ast);
        prop_assert_eq!(print(&reparsed), printed);
    }

    #[test]
    fn extraction_survives_reprinting(ast in sketch_ast().prop_map(holes_only)) {
        let direct = extract_subproblems(&ast).unwrap();
        let reprinted = extract_subproblems(&parse(&print(&ast)).unwrap()).unwrap();
        prop_assert_eq!(extracted_sources(&direct), extracted_sources(&reprinted));
        prop_assert_eq!(direct.len(), ast.show_labels().len());
        let v = elaborator();
        for sub in &direct {
            prop_assert!(unbound_identifiers(&sub.statement).is_empty(), "{}", sub.statement.source);
            prop_assert!(v.check_statement(&sub.statement, Duration::from_secs(1)).unwrap().ok);
        }
    }

    #[test]
    fn whitespace_perturbation_reprints_identically(ast in sketch_ast(), seed in prop::collection::vec(any::<u8>(), 1..16)) {
        let printed = print(&ast);
        let noisy = perturb(&printed, &seed);
        let reparsed = parse(&noisy).map_err(|e| TestCaseError::fail(format!("{e}\n{noisy}")))?;
        prop_assert_eq!(print(&reparsed), printed);
    }

    #[test]
    fn consolidation_uses_each_proof_once(ast in sketch_ast().prop_map(holes_only).prop_map(without_hypotheses)) {
        let proofs = sub_proofs(&ast);
        let out = consolidate(&ast, &proofs).unwrap();
        prop_assert!(!lean::contains_placeholder(&out.source));
        prop_assert_eq!(out.produced_by, ProofOrigin::Consolidation);
        for p in proofs.values() {
            prop_assert_eq!(out.source.matches(&format!("{}\n", p.source)).count(), 1);
        }
        prop_assert!(out.source.ends_with("exact final"));
    }
}
