//! Lookup results on the example tables, derived by hand from the
//! dispatch order: newest layer (with its superlayers) first, then the
//! class itself, then the superclass under all active layers.

use cfj::harness::fixtures::fixture;
use cfj::lookup::{mbody, mtype, noconflict, pmbody, MType};
use cfj::{ClassName, LayerName, LayerSeq, LayerSet, MethodName, Program};

fn seq(names: &[&str]) -> LayerSeq {
    LayerSeq::from_vec(names.iter().map(|n| LayerName::new(n)).collect())
}

fn set(names: &[&str]) -> LayerSet {
    names.iter().map(|n| LayerName::new(n)).collect()
}

fn site(p: &Program, m: &str, c: &str, layers: &[&str]) -> Option<String> {
    let s = seq(layers);
    let m = MethodName::new(m);
    mbody(p, m, ClassName::new(c), &s, &s).map(|b| b.site(m))
}

#[test]
fn lookup1_dispatch() {
    let p = fixture("lookup1").program().unwrap();
    let cases: &[(&str, &[&str], Option<&str>)] = &[
        ("C", &["L1", "L2"], Some("L3.C.m")),
        ("C", &["L1"], Some("L1.D.m")),
        ("C", &[], Some("D.m")),
        ("C", &["L2", "L1"], Some("L3.C.m")),
        ("C", &["L3"], Some("L3.C.m")),
        ("D", &["L3"], Some("D.m")),
        ("E", &["L2"], Some("L2.E.m")),
        ("E", &["L1", "L3"], Some("E.m")),
        ("U", &["L1", "L2", "L3"], None),
        ("Object", &["L1"], None),
    ];
    for &(c, layers, want) in cases {
        assert_eq!(site(&p, "m", c, layers).as_deref(), want, "m on {c} under {layers:?}");
    }
}

#[test]
fn game_dispatch() {
    let p = fixture("game").program().unwrap();
    assert_eq!(site(&p, "sayWeather", "People", &["Foggy", "Thunder"]).as_deref(), Some("Thunder.People.sayWeather"));
    assert_eq!(site(&p, "sayWeather", "People", &["Foggy"]).as_deref(), Some("Foggy.People.sayWeather"));
    assert_eq!(site(&p, "sayWeather", "People", &["Event"]), None);
    assert_eq!(site(&p, "sayWeather", "People", &[]), None);
    assert_eq!(site(&p, "greet", "People", &["Hard", "Easy"]).as_deref(), Some("Easy.People.greet"));
    assert_eq!(site(&p, "greet", "People", &["Foggy"]).as_deref(), Some("People.greet"));
}

#[test]
fn partial_method_bodies_come_from_the_superlayer_chain() {
    let p = fixture("lookup1").program().unwrap();
    let m = MethodName::new("m");
    let found = pmbody(&p, m, ClassName::new("C"), LayerName::new("L2")).unwrap();
    assert_eq!(found.found_layer, LayerName::new("L3"));
    assert!(pmbody(&p, m, ClassName::new("C"), LayerName::new("L1")).is_none());
    assert!(pmbody(&p, m, ClassName::new("D"), LayerName::new("L3")).is_none());
}

#[test]
fn method_types_under_layer_sets() {
    let p = fixture("game").program().unwrap();
    let m = MethodName::new("sayWeather");
    let people = ClassName::new("People");
    assert!(mtype(&p, m, people, &set(&[]), &set(&[])).is_undefined());
    let sig = mtype(&p, m, people, &set(&["Foggy"]), &set(&["Foggy"]));
    assert_eq!(sig.defined().map(ToString::to_string).as_deref(), Some("() → Text"));
    assert!(mtype(&p, m, people, &set(&["Event"]), &set(&["Event"])).is_undefined());
}

#[test]
fn conflicting_baseless_methods() {
    let p = fixture("reject_conflict").program().unwrap();
    let (l1, l2) = (LayerName::new("L1"), LayerName::new("L2"));
    assert!(!noconflict(&p, l1, l2));
    assert!(noconflict(&p, l1, l1));
    let got = mtype(&p, MethodName::new("m"), ClassName::new("K"), &set(&["L1", "L2"]), &set(&["L1", "L2"]));
    assert!(matches!(got, MType::Conflict(ref all) if all.len() == 2), "{got:?}");
}
