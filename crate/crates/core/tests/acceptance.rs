//! Acceptance criteria 1–7, one PASS/FAIL line each. Runs without the
//! libtest harness so the lines are always printed.

use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cfj::harness::fixtures::{corpus, corpus_dir, fixture, Expectation, Fixture};
use cfj::harness::provenance::{call_edges, invocation_entries};
use cfj::harness::{
    enumerate_mains, lemma_suite, oracle_equivalence, run_differential, run_soundness, SoundnessConfig, Verdict,
};
use cfj::semantics::{eval, step, Outcome, StepOutcome};
use cfj::typing::{check_tables, TypeErrorCode};
use cfj::{check_program, parse_program, parse_runtime_expr, render_program, LayerName, LayerSeq, Program};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const ENUMERATED: &[&str] = &["lookup1", "lookup2", "game"];
const DEPTH: usize = 4;
const MAX_STEPS: usize = 200;
const BUDGET: Duration = Duration::from_secs(60);

fn seq(names: &[&str]) -> LayerSeq {
    LayerSeq::from_vec(names.iter().map(|n| LayerName::new(n)).collect())
}

fn program(id: &str) -> Program {
    fixture(id).program().unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_dispatches(id: &str) -> Result<(), String> {
    let p = program(id);
    let (_, trace) = eval(&p, &p.main, MAX_STEPS);
    let path = corpus_dir().join("golden").join(format!("{id}.dispatch"));
    let want = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(trace.render_dispatches() == want, || format!("{id}: dispatch log differs from {}", path.display()))
}

fn criterion_1() -> Check {
    for id in ["lookup1", "lookup1_single", "lookup2"] {
        golden_dispatches(id)?;
    }
    let mut found = 0;
    for (id, want) in [("lookup1", "L3.C.m"), ("lookup1_single", "L1.D.m")] {
        let p = program(id);
        let (_, trace) = eval(&p, &p.main, MAX_STEPS);
        let entries = invocation_entries(&trace);
        let first = entries.first().map(|e| e.to.to_string());
        ensure(first.as_deref() == Some(want), || format!("{id}: first entry {first:?}, expected {want}"))?;
        found += 1;
    }
    let p = program("lookup2");
    let (_, trace) = eval(&p, &p.main, MAX_STEPS);
    let edges: Vec<(String, String, String)> =
        call_edges(&trace).iter().map(|e| (e.from.to_string(), e.kind.to_string(), e.to.to_string())).collect();
    let expected = [
        ("L4.C.m", "super", "L1.D.m"),
        ("L1.C.m", "super", "L1.D.m"),
        ("L1.D.m", "super", "L4.E.m"),
        ("D.m", "super", "L4.E.m"),
        ("L4.C.m", "proceed", "L2.C.m"),
        ("L1.C.m", "proceed", "L1.D.m"),
        ("L3.C.m", "superproceed", "L4.C.m"),
    ];
    for (from, kind, to) in expected {
        ensure(edges.iter().any(|(f, k, t)| f == from && k == kind && t == to), || {
            format!("lookup2: no {kind} edge {from} -> {to}")
        })?;
        found += 1;
    }
    Ok(format!("{found} documented resolutions observed; golden dispatch logs match"))
}

fn criterion_2() -> Check {
    let p = program("lookup2");
    let e = parse_runtime_expr(&p, "new C().m()").map_err(|e| e.to_string())?;
    let StepOutcome::Stepped(s) = step(&p, &seq(&["L1", "L2", "L3"]), &e) else {
        return Err("new C().m() did not step".into());
    };
    ensure(s.path_string() == "R-Invk/R-InvkP", || format!("rules {}", s.path_string()))?;
    let want = "new Pair(new C()<D,(L1;L2;L3),(L1;L2;L3)>.m(), \
                new Pair(new C()<C,(L1;L2),(L1;L2;L3)>.m(), new C()<C,L4,(L1;L2;L3),(L1;L2;L3)>.m()))";
    let got = s.expr.to_string();
    ensure(got == want, || format!("body {got}"))?;
    Ok("R-Invk then R-InvkP; proceed cursor (L1;L2), superproceed quad through L4".into())
}

fn rejects_with(id: &str, code: TypeErrorCode) -> Result<(), String> {
    match check_program(&program(id)) {
        Ok(t) => Err(format!("{id} accepted at {t}")),
        Err(errs) => ensure(errs.iter().any(|e| e.rule == "T-LayerSW" && e.code == code), || {
            format!("{id}: no T-LayerSW {code:?} error among {}", errs.len())
        }),
    }
}

fn stuck_at(id: &str, want_expr: &str, want_active: &[&str]) -> Result<usize, String> {
    let p = program(id);
    let (out, trace) = eval(&p, &p.main, 10);
    match out {
        Outcome::Stuck { expr, active, .. } => {
            ensure(expr.to_string() == want_expr, || format!("{id}: stuck at {expr}"))?;
            ensure(active == seq(want_active), || format!("{id}: stuck under {active}"))?;
            Ok(trace.entries.len())
        }
        other => Err(format!("{id}: unchecked run ended with {other:?}")),
    }
}

fn criterion_3() -> Check {
    rejects_with("cex1", TypeErrorCode::SwappableRequiresChanged)?;
    rejects_with("cex2", TypeErrorCode::SwappableNewMethod)?;
    let n1 = stuck_at(
        "cex1",
        "with new L1() { with new L() { swap (new L2(), L0) { new C()<C,•,(L;L2)>.m() } } }",
        &["L", "L2"],
    )?;
    let n2 = stuck_at("cex2", "with new L2() { swap (new L1(), L0) { new D().m() } }", &["L1"])?;
    Ok(format!("both rejected by T-LayerSW; unchecked runs stuck after {n1} and {n2} steps"))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let mut accepted = 0;
    for f in corpus().map_err(|e| e.to_string())? {
        let p = f.program().map_err(|e| format!("{}: {e}", f.id))?;
        let r = run_soundness(&f.id, &p, SoundnessConfig::new(MAX_STEPS));
        match (&f.expect, r.verdict) {
            (Expectation::Accept { .. }, Verdict::Pass) => accepted += 1,
            (Expectation::Reject { .. }, Verdict::NotAccepted) => {}
            _ => {
                let first = r.violations.first().map(ToString::to_string).unwrap_or_default();
                return Err(format!("{}: {:?} {first}", f.id, r.verdict));
            }
        }
    }
    ensure(accepted >= 20, || format!("only {accepted} accepted fixtures"))?;
    let (mut candidates, mut checked) = (0, 0);
    for id in ENUMERATED {
        let s = run_differential(&program(id), DEPTH, MAX_STEPS);
        if let Some(v) = s.violations.first() {
            return Err(format!("{id}: {} violation(s), first in {}: {:?}", s.violations.len(), v.id, v.failure));
        }
        candidates += s.candidates;
        checked += s.accepted;
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= BUDGET, || format!("took {elapsed:.1?}"))?;
    Ok(format!(
        "{accepted} fixtures and {checked} of {candidates} enumerated candidates accepted and sound in {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn well_typed_tables(fixtures: &[Fixture]) -> Vec<(String, Program)> {
    fixtures
        .iter()
        .filter_map(|f| f.program().ok().map(|p| (f.id.clone(), p)))
        .filter(|(_, p)| check_tables(p).is_ok())
        .collect()
}

fn criterion_5() -> Check {
    let fixtures = corpus().map_err(|e| e.to_string())?;
    let mut queries = 0;
    for f in &fixtures {
        let p = f.program().map_err(|e| format!("{}: {e}", f.id))?;
        let g = oracle_equivalence(&p);
        if let Some(v) = g.violations.first() {
            return Err(format!("{}: {} disagreement(s), first {v}", f.id, g.violations.len()));
        }
        queries += g.queries;
    }
    Ok(format!("{queries} queries over {} fixtures, no disagreements", fixtures.len()))
}

fn criterion_6() -> Check {
    let tables = well_typed_tables(&corpus().map_err(|e| e.to_string())?);
    let mut queries = 0;
    for (id, p) in &tables {
        let g = lemma_suite(p);
        if let Some(v) = g.violations.first() {
            return Err(format!("{id}: {} violation(s), first {v}", g.violations.len()));
        }
        queries += g.queries;
    }
    Ok(format!("{queries} queries over {} well-typed tables, no violations", tables.len()))
}

fn roundtrip(label: &str, p: &Program) -> Result<(), String> {
    let text = render_program(p);
    let again = parse_program(&text).map_err(|e| format!("{label}: rendered program does not parse: {e}"))?;
    ensure(again.main == p.main, || format!("{label}: main changed"))?;
    ensure(render_program(&again) == text, || format!("{label}: rendering is not stable"))
}

fn criterion_7() -> Check {
    let fixtures = corpus().map_err(|e| e.to_string())?;
    for f in &fixtures {
        roundtrip(&f.id, &f.program().map_err(|e| format!("{}: {e}", f.id))?)?;
    }
    let mut candidates = 0;
    for id in ENUMERATED {
        let p = program(id);
        for (i, main) in enumerate_mains(&p, DEPTH).into_iter().enumerate() {
            roundtrip(&format!("{id}#{i}"), &p.with_main(main))?;
            candidates += 1;
        }
    }
    Ok(format!("{} fixtures and {candidates} enumerated programs", fixtures.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("golden dispatch", criterion_1),
        ("reduction derivation", criterion_2),
        ("counterexample rejection", criterion_3),
        ("soundness suite", criterion_4),
        ("oracle equivalence", criterion_5),
        ("lemma suite", criterion_6),
        ("parser round-trip", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
