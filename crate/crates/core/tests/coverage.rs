//! Every reduction rule and every typing rule is exercised by the corpus:
//! reduction rules by the traces of accepted programs, typing rules by
//! successful derivations (static checks plus re-typing each reduct), and
//! rejection by at least one fixture citing each checked rule.

use std::collections::BTreeSet;

use cfj::harness::fixtures::{corpus, Expectation};
use cfj::semantics::{eval, RuleName};
use cfj::typing::Checker;
use cfj::{Location, LayerSet, TypeEnv};

const TYPING_RULES: &[&str] = &[
    "T-Var",
    "T-Field",
    "T-Invk",
    "T-New",
    "T-NewL",
    "T-With",
    "T-Swap",
    "T-SuperB",
    "T-SuperP",
    "T-Proceed",
    "T-SuperProceed",
    "T-InvkA",
    "T-InvkAL",
    "Wf-Cursor",
    "T-Method",
    "T-PMethod",
    "T-Class",
    "T-Layer",
    "T-LayerSW",
    "T-Table",
    "T-Prog",
];

const REJECTING_RULES: &[&str] = &[
    "T-Var",
    "T-Field",
    "T-Invk",
    "T-New",
    "T-With",
    "T-Swap",
    "T-SuperB",
    "T-SuperP",
    "T-Proceed",
    "T-SuperProceed",
    "T-Method",
    "T-PMethod",
    "T-Class",
    "T-Layer",
    "T-LayerSW",
    "T-Table",
];

#[test]
fn every_reduction_rule_fires_in_the_corpus() {
    let mut seen = BTreeSet::new();
    for f in corpus().unwrap() {
        if let Expectation::Accept { .. } = f.expect {
            let p = f.program().unwrap();
            let (_, trace) = eval(&p, &p.main, 200);
            for e in &trace.entries {
                seen.extend(e.path.iter().copied());
            }
        }
    }
    let missing: Vec<RuleName> = RuleName::ALL.into_iter().filter(|r| !seen.contains(r)).collect();
    assert!(missing.is_empty(), "never used: {missing:?}");
}

#[test]
fn every_typing_rule_is_used_in_some_derivation() {
    let mut seen = BTreeSet::new();
    for f in corpus().unwrap() {
        if let Expectation::Accept { .. } = f.expect {
            let p = f.program().unwrap();
            let checker = Checker::new(&p).with_coverage();
            checker.check_program(&p.main).unwrap();
            let (_, trace) = eval(&p, &p.main, 200);
            for e in &trace.entries {
                checker
                    .type_expr(&Location::TopLevel, &LayerSet::new(), &TypeEnv::empty(), &e.expr)
                    .unwrap_or_else(|err| panic!("{} step {}: {err}", f.id, e.index));
            }
            seen.extend(checker.rules_used());
        }
    }
    let missing: Vec<&str> = TYPING_RULES.iter().copied().filter(|r| !seen.contains(r)).collect();
    assert!(missing.is_empty(), "never used: {missing:?}");
}

#[test]
fn every_checked_rule_rejects_some_fixture() {
    let cited: BTreeSet<String> = corpus()
        .unwrap()
        .into_iter()
        .filter_map(|f| match f.expect {
            Expectation::Reject { rule } => Some(rule),
            _ => None,
        })
        .collect();
    let missing: Vec<&str> = REJECTING_RULES.iter().copied().filter(|r| !cited.contains(*r)).collect();
    assert!(missing.is_empty(), "no rejecting fixture for {missing:?}");
}
