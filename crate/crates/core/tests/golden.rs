//! Traces and dispatch logs pinned under `fixtures/golden/`. Set
//! `CFJ_BLESS=1` to rewrite them after an intended change.

use std::fs;
use std::path::PathBuf;

use cfj::harness::fixtures::{corpus_dir, fixture};
use cfj::semantics::eval;

const GOLDEN: &[&str] = &[
    "lookup1",
    "lookup1_single",
    "lookup2",
    "game",
    "game_swap",
    "cex1",
    "cex2",
    "swap_requires",
    "superproceed_chain",
];

fn golden_path(id: &str, ext: &str) -> PathBuf {
    corpus_dir().join("golden").join(format!("{id}.{ext}"))
}

fn compare(id: &str, ext: &str, actual: &str) -> Option<String> {
    let path = golden_path(id, ext);
    if std::env::var_os("CFJ_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
        return None;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    (expected != actual).then(|| format!("{id}.{ext} differs:\n--- expected\n{expected}--- actual\n{actual}"))
}

#[test]
fn traces_match_golden_files() {
    let mut diffs = Vec::new();
    for id in GOLDEN {
        let p = fixture(id).program().unwrap();
        let (_, trace) = eval(&p, &p.main, 200);
        diffs.extend(compare(id, "trace", &trace.render()));
        diffs.extend(compare(id, "dispatch", &trace.render_dispatches()));
    }
    assert!(diffs.is_empty(), "{}", diffs.join("\n"));
}

#[test]
fn trace_lines_follow_the_documented_shape() {
    let p = fixture("lookup1").program().unwrap();
    let (_, trace) = eval(&p, &p.main, 200);
    let first = trace.render().lines().next().unwrap().to_owned();
    assert_eq!(first, "#1 [L1;L2] RC-With/RC-With/R-Invk/R-InvkP with new L1() { with new L2() { new FromL3C() } }");
}
