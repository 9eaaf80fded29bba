use cfj::harness::fixtures::fixture;
use cfj::typing::wf::wf_layer_set;
use cfj::typing::TypeErrorCode;
use cfj::{check_program, parse_runtime_expr, type_expr, LayerName, LayerSet, Location, TypeEnv};

fn set(names: &[&str]) -> LayerSet {
    names.iter().map(|n| LayerName::new(n)).collect()
}

#[test]
fn reachable_layer_sets_in_the_game() {
    let p = fixture("game").program().unwrap();
    let wf = |names: &[&str]| wf_layer_set(&p, &set(names));
    assert!(wf(&[]));
    assert!(wf(&["Foggy"]));
    assert!(wf(&["Foggy", "Thunder"]));
    assert!(wf(&["Stormy", "ThunderInStorm"]));
    assert!(wf(&["Easy", "Hard"]));
    assert!(!wf(&["Thunder"]));
    assert!(!wf(&["Foggy", "ThunderInStorm"]));
    assert!(!wf(&["Event", "ThunderInStorm"]));
}

#[test]
fn a_swap_can_remove_the_layer_a_requirement_was_checked_against() {
    let p = fixture("swap_requires").program().unwrap();
    assert!(wf_layer_set(&p, &set(&["Relaxed", "Stadium"])));
    assert!(!wf_layer_set(&p, &set(&["Stadium"])));
}

fn type_runtime(id: &str, active: &[&str], src: &str) -> Result<String, &'static str> {
    let p = fixture(id).program().unwrap();
    let e = parse_runtime_expr(&p, src).unwrap();
    type_expr(&p, &Location::TopLevel, &set(active), &TypeEnv::empty(), &e).map(|t| t.to_string()).map_err(|e| e.rule)
}

#[test]
fn runtime_invocations() {
    let ok = Ok("Text".to_owned());
    let call = "new People()<People,(Foggy),(Foggy)>.sayWeather()";
    assert_eq!(type_runtime("game", &["Foggy"], call), ok);
    assert_eq!(type_runtime("game", &["Foggy"], "new People()<People,Weather,(Foggy),(Foggy)>.sayWeather()"), ok);
    assert_eq!(
        type_runtime("game", &["Foggy", "Thunder"], "new People()<People,(Foggy),(Foggy;Thunder)>.sayWeather()"),
        ok
    );
    // The active set must cover the cursor's layers.
    assert_eq!(type_runtime("game", &[], call), Err("T-InvkA"));
    // ... except that a sibling under a swappable layer stands in for it.
    assert_eq!(type_runtime("game", &["Hard"], "new People()<People,(Easy),(Easy)>.greet()"), ok);
    assert_eq!(type_runtime("game", &["Foggy"], "new People()<People,(Easy),(Easy)>.greet()"), Err("T-InvkA"));
    // Thunder alone cannot be active: its requirement is missing.
    assert!(type_runtime("game", &["Thunder"], "new People()<People,(Thunder),(Thunder)>.sayWeather()").is_err());
    // The empty prefix leaves nothing to run.
    assert!(type_runtime("game", &["Foggy"], "new People()<People,•,(Foggy)>.sayWeather()").is_err());
}

#[test]
fn diagnostics_name_the_rule_and_location() {
    let errs = check_program(&fixture("cex1").program().unwrap()).unwrap_err();
    assert_eq!(errs.len(), 1);
    let e = &errs[0];
    assert_eq!(e.code, TypeErrorCode::SwappableRequiresChanged);
    assert!(e.to_string().starts_with("[T-LayerSW] "), "{e}");
    assert!(e.location.contains("L2"), "{}", e.location);

    let errs = check_program(&fixture("cex2").program().unwrap()).unwrap_err();
    assert_eq!(errs.len(), 2);
    assert!(errs.iter().all(|e| e.code == TypeErrorCode::SwappableNewMethod));
}

#[test]
fn requirement_errors_report_what_is_missing() {
    let errs = check_program(&fixture("reject_with_requires").program().unwrap()).unwrap_err();
    assert_eq!(errs[0].code, TypeErrorCode::RequiresUnsatisfied);
    assert!(errs[0].message.contains("Provider"), "{}", errs[0].message);
}
