//! Class subtyping, weak and normal layer subtyping, and the two
//! layer-set relations. Decided by reachability over memoized ancestor chains.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};

use crate::ast::*;

/// `c` followed by its strict ancestors, ending at `Object` (or at the first
/// unknown name / repeated name on a malformed table).
pub fn class_chain(t: &Tables, c: ClassName) -> Cow<'_, [ClassName]> {
    let chains = t.cache.class_chains.get_or_init(|| {
        let mut m = HashMap::new();
        for &c in t.classes.keys().chain([ClassName::object()].iter()) {
            m.insert(c, walk(c, |x| t.superclass(x)));
        }
        m
    });
    chains.get(&c).map_or_else(|| Cow::Owned(vec![c]), |v| Cow::Borrowed(v.as_slice()))
}

/// `l` followed by its strict superlayers, ending at `Base`.
pub fn layer_chain(t: &Tables, l: LayerName) -> Cow<'_, [LayerName]> {
    let chains = t.cache.layer_chains.get_or_init(|| {
        let mut m = HashMap::new();
        for &l in t.layers.keys().chain([LayerName::base()].iter()) {
            m.insert(l, walk(l, |x| t.superlayer(x)));
        }
        m
    });
    chains.get(&l).map_or_else(|| Cow::Owned(vec![l]), |v| Cow::Borrowed(v.as_slice()))
}

fn walk<N: Copy + Eq + std::hash::Hash>(start: N, parent: impl Fn(N) -> Option<N>) -> Vec<N> {
    let mut out = vec![start];
    let mut seen = HashSet::from([start]);
    let mut cur = start;
    while let Some(p) = parent(cur) {
        if !seen.insert(p) {
            break;
        }
        out.push(p);
        cur = p;
    }
    out
}

/// `c ≤ d`.
pub fn class_sub(t: &Tables, c: ClassName, d: ClassName) -> bool {
    c == d || class_chain(t, c).contains(&d)
}

/// `l1 ≤w l2`: reachable by zero or more `extends` steps.
pub fn weak_sub(t: &Tables, l1: LayerName, l2: LayerName) -> bool {
    l1 == l2 || layer_chain(t, l1).contains(&l2)
}

/// `l1 ≤ l2`: weak subtyping where every `extends` edge on the way keeps the
/// requires set unchanged (`Base` requires nothing).
pub fn normal_sub(t: &Tables, l1: LayerName, l2: LayerName) -> bool {
    if l1 == l2 {
        return true;
    }
    let chain = layer_chain(t, l1);
    let Some(pos) = chain.iter().position(|&x| x == l2) else {
        return false;
    };
    chain[..=pos].windows(2).all(|w| t.requires(w[0]) == t.requires(w[1]))
}

/// `Λ1 ≤w Λ2`: every member of `lam2` has a weak sublayer in `lam1`.
pub fn set_weak_sub(t: &Tables, lam1: &LayerSet, lam2: &LayerSet) -> bool {
    lam2.iter().all(|&l0| lam1.iter().any(|&l1| weak_sub(t, l1, l0)))
}

/// `Λ1 ≤sw Λ2`: like `≤w`, but a member of `lam2` may also be matched by a
/// layer sharing a swappable ancestor with it.
pub fn set_sw_sub(t: &Tables, lam1: &LayerSet, lam2: &LayerSet) -> bool {
    lam2.iter().all(|&l0| {
        lam1.iter().any(|&l1| {
            weak_sub(t, l1, l0)
                || t.layers.values().any(|d| d.swappable && weak_sub(t, l0, d.name) && weak_sub(t, l1, d.name))
        })
    })
}

/// Subtyping on types: class subtyping for classes, normal layer subtyping
/// for layers, never across the two.
pub fn type_sub(t: &Tables, s: Type, u: Type) -> bool {
    match (s, u) {
        (Type::Class(a), Type::Class(b)) => class_sub(t, a, b),
        (Type::Layer(a), Type::Layer(b)) => normal_sub(t, a, b),
        _ => false,
    }
}
