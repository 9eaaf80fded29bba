//! Malformed input is reported, never a panic: every truncation of every
//! fixture goes through parse, check and a short evaluation.

use cfj::harness::fixtures::corpus;
use cfj::semantics::eval;
use cfj::{check_program, parse_program, parse_runtime_expr};

#[test]
fn truncated_fixtures_do_not_panic() {
    for f in corpus().unwrap() {
        for (i, _) in f.source.char_indices() {
            if let Ok(p) = parse_program(&f.source[..i]) {
                let _ = check_program(&p);
                let _ = eval(&p, &p.main, 16);
            }
        }
    }
}

#[test]
fn truncated_runtime_expressions_do_not_panic() {
    let p = parse_program(include_str!("../fixtures/lookup2.cfj")).unwrap();
    let src = "new Pair(new C()<D,(L1;L2;L3),(L1;L2;L3)>.m(), new C()<C,L4,(L1;L2;L3),(L1;L2;L3)>.m())";
    for (i, _) in src.char_indices() {
        let _ = parse_runtime_expr(&p, &src[..i]);
    }
    assert!(parse_runtime_expr(&p, src).is_ok());
}
