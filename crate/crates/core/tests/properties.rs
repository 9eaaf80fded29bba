use std::sync::LazyLock;

use proptest::prelude::*;

use cfj::harness::fixtures::fixture;
use cfj::relations::{class_sub, normal_sub, set_weak_sub, weak_sub};
use cfj::semantics::{eval, swap_fn, with_fn, ActivationEvent};
use cfj::typing::wf::wf_layer_set;
use cfj::{
    parse_program, parse_runtime_expr, render_program, ClassName, Cursor, Expr, LayerName, LayerSeq, MethodName, Program,
};

static GAME: LazyLock<Program> = LazyLock::new(|| fixture("game").program().unwrap());
static LOOKUP2: LazyLock<Program> = LazyLock::new(|| fixture("lookup2").program().unwrap());

fn game_layer() -> impl Strategy<Value = LayerName> {
    prop::sample::select(GAME.layer_names())
}

fn game_seq() -> impl Strategy<Value = LayerSeq> {
    prop::sample::subsequence(GAME.layer_names(), 0..=6)
        .prop_shuffle()
        .prop_map(LayerSeq::from_vec)
}

fn lookup2_expr() -> impl Strategy<Value = Expr> {
    let t = &*LOOKUP2;
    let classes: Vec<ClassName> = ["Object", "U", "C", "D", "E"].into_iter().map(ClassName::new).collect();
    let atom = prop_oneof![
        prop::sample::select(classes.clone()).prop_map(|c| Expr::new_obj(c, vec![])),
        prop::sample::select(t.layer_names()).prop_map(Expr::new_layer),
    ];
    let layers = t.layer_names();
    atom.prop_recursive(5, 48, 3, move |inner| {
        let seqs = prop::sample::subsequence(layers.clone(), 0..=4).prop_shuffle().prop_map(LayerSeq::from_vec);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::new_obj(ClassName::new("Pair"), vec![a, b])),
            inner.clone().prop_map(|e| Expr::invoke(e, MethodName::new("m"), vec![])),
            (inner.clone(), prop::sample::select(vec!["fst", "snd"])).prop_map(|(e, f)| Expr::field(e, f)),
            (prop::sample::select(layers.clone()), inner.clone()).prop_map(|(l, e)| Expr::with(Expr::new_layer(l), e)),
            (inner.clone(), inner.clone()).prop_map(|(l, e)| Expr::with(l, e)),
            (seqs, 0usize..=4, prop::sample::select(classes.clone())).prop_map(|(full, n, c)| {
                let recv = cfj::ast::ObjValue { class: ClassName::new("C"), fields: vec![] };
                let prefix = full.prefix(n.min(full.len()));
                Expr::invoke_a(recv, Cursor::triple(c, prefix, full), "m", vec![])
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weak_subtyping_is_a_preorder(a in game_layer(), b in game_layer(), c in game_layer()) {
        let t = &*GAME;
        prop_assert!(weak_sub(t, a, a));
        if weak_sub(t, a, b) && weak_sub(t, b, c) {
            prop_assert!(weak_sub(t, a, c));
        }
        if weak_sub(t, a, b) && weak_sub(t, b, a) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn normal_subtyping_refines_weak(a in game_layer(), b in game_layer(), c in game_layer()) {
        let t = &*GAME;
        prop_assert!(normal_sub(t, a, a));
        if normal_sub(t, a, b) {
            prop_assert!(weak_sub(t, a, b));
            prop_assert_eq!(t.requires(a), t.requires(b));
        }
        if normal_sub(t, a, b) && normal_sub(t, b, c) {
            prop_assert!(normal_sub(t, a, c));
        }
    }

    #[test]
    fn class_subtyping_is_a_preorder(i in 0usize..5, j in 0usize..5, k in 0usize..5) {
        let t = &*LOOKUP2;
        let names = t.class_names();
        let pick = |n: usize| names.get(n).copied().unwrap_or_else(|| ClassName::new("Object"));
        let (a, b, c) = (pick(i), pick(j), pick(k));
        prop_assert!(class_sub(t, a, a));
        prop_assert!(class_sub(t, a, ClassName::new("Object")));
        if class_sub(t, a, b) && class_sub(t, b, c) {
            prop_assert!(class_sub(t, a, c));
        }
    }

    #[test]
    fn with_moves_the_layer_to_the_front(seq in game_seq(), l in game_layer()) {
        let out = with_fn(l, &seq);
        prop_assert_eq!(out.last(), Some(l));
        let rest: Vec<LayerName> = seq.iter().filter(|&x| x != l).collect();
        let kept: Vec<LayerName> = out.iter().take(out.len() - 1).collect();
        prop_assert_eq!(kept, rest);
    }

    #[test]
    fn swap_replaces_the_whole_family(seq in game_seq(), l in game_layer()) {
        let t = &*GAME;
        let lsw = LayerName::new("Difficulty");
        let out = swap_fn(t, l, lsw, &seq).unwrap();
        prop_assert_eq!(out.last(), Some(l));
        for x in out.iter().take(out.len() - 1) {
            prop_assert!(!weak_sub(t, x, lsw));
        }
        let rest: Vec<LayerName> = seq.iter().filter(|&x| x != l && !weak_sub(t, x, lsw)).collect();
        let kept: Vec<LayerName> = out.iter().take(out.len() - 1).collect();
        prop_assert_eq!(kept, rest);
        prop_assert!(swap_fn(t, l, LayerName::new("Weather"), &seq).is_err());
    }

    #[test]
    fn legal_activations_reach_well_formed_sets(picks in prop::collection::vec((game_layer(), any::<bool>()), 0..10)) {
        let t = &*GAME;
        let lsw = LayerName::new("Difficulty");
        let mut seq = LayerSeq::empty();
        for (l, swap) in picks {
            let ev = if swap && weak_sub(t, l, lsw) { ActivationEvent::Swap(l, lsw) } else { ActivationEvent::With(l) };
            let next = ev.apply(t, &seq);
            let before = match ev {
                ActivationEvent::With(_) => seq.to_set(),
                ActivationEvent::Swap(..) => seq.iter().filter(|&x| !weak_sub(t, x, lsw)).collect(),
            };
            if set_weak_sub(t, &before, &t.requires(l)) {
                seq = next;
            }
            prop_assert!(wf_layer_set(t, &seq.to_set()), "{} is reachable", seq);
        }
    }

    #[test]
    fn programs_round_trip_through_rendering(e in lookup2_expr()) {
        let p = LOOKUP2.with_main(e);
        let again = parse_program(&render_program(&p));
        match again {
            Ok(q) => prop_assert_eq!(q.main, p.main),
            // Runtime annotations have no surface syntax.
            Err(_) => prop_assert!(p.main.to_string().contains('<')),
        }
    }

    #[test]
    fn runtime_expressions_round_trip(e in lookup2_expr()) {
        let text = e.to_string();
        let back = parse_runtime_expr(&LOOKUP2, &text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back, e);
    }

    #[test]
    fn evaluation_is_deterministic(e in lookup2_expr()) {
        let t = &*LOOKUP2;
        let (o1, t1) = eval(t, &e, 100);
        let (o2, t2) = eval(t, &e, 100);
        prop_assert_eq!(o1, o2);
        prop_assert_eq!(t1.render(), t2.render());
    }
}
