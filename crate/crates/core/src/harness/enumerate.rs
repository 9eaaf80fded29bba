//! Bounded enumeration of main expressions over fixed tables.
//!
//! Depth 1 holds the atoms: `new C()` for every field-less class
//! (including `Object`) and `new L()` for every declared layer. Depth `d`
//! holds the atoms, `new C(ā)` for classes with fields (arguments are
//! atoms), and one constructor applied to depth-`d-1` expressions:
//! `e.m(ē)`, `e.f`, `with new L() { e }`, `swap (new L(), Lsw) { e }`.

use std::collections::BTreeSet;

use crate::ast::*;
use crate::lookup::fields;
use crate::relations::weak_sub;

/// Deepest enumeration the harness agrees to build.
pub const MAX_DEPTH: usize = 5;

/// The names the enumerator draws from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    pub atoms: Vec<Expr>,
    /// Classes with at least one field, with their arity.
    pub constructors: Vec<(ClassName, usize)>,
    /// Distinct `(method, arity)` pairs over base and partial methods.
    pub methods: Vec<(MethodName, usize)>,
    pub fields: Vec<FieldName>,
    pub layers: Vec<LayerName>,
    /// `(L, Lsw)` with `Lsw` swappable and `L ≤w Lsw`.
    pub swaps: Vec<(LayerName, LayerName)>,
}

impl Alphabet {
    pub fn of(t: &Tables) -> Alphabet {
        let mut a = Alphabet::default();
        let mut classes: Vec<ClassName> = vec![ClassName::object()];
        classes.extend(t.classes.keys().copied());
        for &c in &classes {
            match fields(t, c).map(<[_]>::len) {
                Ok(0) => a.atoms.push(Expr::new_obj(c, vec![])),
                Ok(n) => a.constructors.push((c, n)),
                Err(_) => {}
            }
        }
        a.atoms.extend(t.layers.keys().map(|&l| Expr::new_layer(l)));
        let mut methods = BTreeSet::new();
        let mut field_names = BTreeSet::new();
        for c in t.classes.values() {
            methods.extend(c.methods.values().map(|m| (m.name, m.params.len())));
            field_names.extend(c.fields.iter().map(|f| f.name));
        }
        for l in t.layers.values() {
            methods.extend(l.partial_methods.values().map(|m| (m.name, m.params.len())));
        }
        a.methods = methods.into_iter().collect();
        a.fields = field_names.into_iter().collect();
        a.layers = t.layers.keys().copied().collect();
        for sw in t.layers.values().filter(|d| d.swappable) {
            a.swaps.extend(t.layers.keys().filter(|&&l| weak_sub(t, l, sw.name)).map(|&l| (l, sw.name)));
        }
        a
    }
}

/// Every main expression of depth at most `depth`, in a fixed order.
pub fn enumerate_mains(t: &Tables, depth: usize) -> Vec<Expr> {
    assert!(depth <= MAX_DEPTH, "enumeration depth {depth} exceeds {MAX_DEPTH}");
    let a = Alphabet::of(t);
    if depth == 0 {
        return Vec::new();
    }
    let mut level = a.atoms.clone();
    for _ in 1..depth {
        let prev = level;
        let mut next = a.atoms.clone();
        for &(c, n) in &a.constructors {
            for args in tuples(&a.atoms, n) {
                next.push(Expr::new_obj(c, args));
            }
        }
        for &(m, n) in &a.methods {
            for recv in &prev {
                for args in tuples(&prev, n) {
                    next.push(Expr::invoke(recv.clone(), m, args));
                }
            }
        }
        for &f in &a.fields {
            next.extend(prev.iter().map(|e| Expr::field(e.clone(), f)));
        }
        for &l in &a.layers {
            next.extend(prev.iter().map(|e| Expr::with(Expr::new_layer(l), e.clone())));
        }
        for &(l, lsw) in &a.swaps {
            next.extend(prev.iter().map(|e| Expr::swap(Expr::new_layer(l), lsw, e.clone())));
        }
        level = next;
    }
    level
}

/// Candidate programs: the tables of `p` with each enumerated main.
pub fn enumerate_programs(p: &Program, depth: usize) -> impl Iterator<Item = Program> + '_ {
    enumerate_mains(p, depth).into_iter().map(move |e| p.with_main(e))
}

fn tuples(pool: &[Expr], n: usize) -> Vec<Vec<Expr>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pool.iter().map(move |e| {
                    let mut v = prefix.clone();
                    v.push(e.clone());
                    v
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    #[test]
    fn depth_one_is_atoms() {
        let p = parse_program("class C extends Object {} layer L1 {} main { new C() }").unwrap();
        let got: Vec<String> = enumerate_mains(&p, 1).iter().map(ToString::to_string).collect();
        assert_eq!(got, vec!["new Object()", "new C()", "new L1()"]);
    }

    #[test]
    fn depth_three_nests() {
        let p = parse_program(
            "class U extends Object {} class C extends Object { U m() { return new U(); } } layer L1 {} main { new C() }",
        )
        .unwrap();
        let all = enumerate_mains(&p, 3);
        let target = Expr::with(Expr::new_layer("L1"), Expr::invoke(Expr::new_obj("C", vec![]), "m", vec![]));
        assert!(all.contains(&target));
        let distinct: std::collections::HashSet<String> = all.iter().map(ToString::to_string).collect();
        assert_eq!(distinct.len(), all.len());
    }
}
