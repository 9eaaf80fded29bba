use cfj::harness::fixtures::{corpus, Expectation};
use cfj::semantics::{eval, Outcome};
use cfj::{check_program, Type};

#[test]
fn corpus_meets_its_headers() {
    let fixtures = corpus().expect("corpus loads");
    let mut failures = Vec::new();
    for f in &fixtures {
        let p = match f.program() {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("{}: does not load: {e}", f.id));
                continue;
            }
        };
        let checked = check_program(&p);
        match (&f.expect, &checked) {
            (Expectation::Accept { ty, result }, Ok(got)) => {
                if got.to_string() != *ty {
                    failures.push(format!("{}: type {got}, expected {ty}", f.id));
                }
                if let Some(want) = result {
                    match eval(&p, &p.main, 10_000).0 {
                        Outcome::Value(v) if v.to_string() == *want => {}
                        other => failures.push(format!("{}: ended with {other:?}, expected {want}", f.id)),
                    }
                }
            }
            (Expectation::Accept { .. }, Err(errs)) => {
                failures.push(format!("{}: rejected: {}", f.id, errs[0]));
            }
            (Expectation::Reject { rule }, Err(errs)) => {
                if !errs.iter().any(|e| e.rule == rule) {
                    let got: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
                    failures.push(format!("{}: expected {rule}, got {got:?}", f.id));
                }
            }
            (Expectation::Reject { rule }, Ok(t)) => {
                failures.push(format!("{}: accepted at {t}, expected rejection by {rule}", f.id));
            }
            (Expectation::Unspecified, _) => failures.push(format!("{}: no expect header", f.id)),
        }
        if let Some(n) = f.unchecked_stuck {
            let (out, trace) = eval(&p, &p.main, 10_000);
            if !matches!(out, Outcome::Stuck { .. }) || trace.entries.len() != n {
                failures.push(format!("{}: unchecked run gave {out:?} after {} steps", f.id, trace.entries.len()));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn corpus_has_enough_accepted_programs() {
    let fixtures = corpus().unwrap();
    let accepted = fixtures.iter().filter(|f| matches!(f.expect, Expectation::Accept { .. })).count();
    let rejected = fixtures.iter().filter(|f| matches!(f.expect, Expectation::Reject { .. })).count();
    assert!(accepted >= 20, "{accepted} accepted fixtures");
    assert!(rejected >= 10, "{rejected} rejected fixtures");
}

#[test]
fn accepted_programs_never_get_stuck() {
    for f in corpus().unwrap() {
        if let Expectation::Accept { .. } = f.expect {
            let p = f.program().unwrap();
            let (out, _) = eval(&p, &p.main, 500);
            assert!(!matches!(out, Outcome::Stuck { .. }), "{}: {out:?}", f.id);
        }
    }
}

#[test]
fn layer_results_have_layer_types() {
    let p = cfj::harness::fixtures::fixture("layer_main").program().unwrap();
    assert!(matches!(check_program(&p), Ok(Type::Layer(_))));
}
