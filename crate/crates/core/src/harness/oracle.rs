//! Dispatch resolver written from the informal description of lookup:
//! activated layers are searched newest first, each layer together with
//! its superlayers, before the class itself; failing that, the search
//! repeats at the superclass. Reads the declaration tables directly and
//! shares no code with the lookup module.

use std::fmt;

use crate::ast::{ClassName, LayerName, LayerSeq, MethodName, Tables};

/// Where a definition was found, plus the search position needed to
/// continue from it with `proceed`, `super` or `superproceed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    /// Class whose (partial) method was found.
    pub class: ClassName,
    /// Defining layer, or `None` for a base method.
    pub layer: Option<LayerName>,
    /// Index of the activated layer whose search hit (the defining layer is
    /// that layer or one of its superlayers).
    pub position: Option<usize>,
}

impl Resolution {
    pub fn site(&self, m: MethodName) -> String {
        match self.layer {
            Some(l) => format!("{l}.{}.{m}", self.class),
            None => format!("{}.{m}", self.class),
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            Some(l) => write!(f, "layer {l} for class {}", self.class),
            None => write!(f, "base class {}", self.class),
        }
    }
}

/// Search one activated layer and then its superlayers for `C.m`.
fn in_layer_family(t: &Tables, start: LayerName, c: ClassName, m: MethodName) -> Option<LayerName> {
    let mut cur = start;
    for _ in 0..=t.layers.len() {
        let decl = t.layers.get(&cur)?;
        if decl.partial_methods.contains_key(&(c, m)) {
            return Some(cur);
        }
        cur = decl.superlayer;
    }
    None
}

/// Search activated layers `seq[..end]` newest first, then the base class,
/// then climb to the superclass where all of `seq` is searched again.
fn search(t: &Tables, seq: &LayerSeq, c: ClassName, m: MethodName, end: usize) -> Option<Resolution> {
    let layers = seq.as_slice();
    let mut class = c;
    let mut end = end;
    for _ in 0..=t.classes.len() {
        for i in (0..end).rev() {
            if let Some(found) = in_layer_family(t, layers[i], class, m) {
                return Some(Resolution { class, layer: Some(found), position: Some(i) });
            }
        }
        let decl = t.classes.get(&class)?;
        if decl.methods.contains_key(&m) {
            return Some(Resolution { class, layer: None, position: None });
        }
        class = decl.superclass;
        end = layers.len();
    }
    None
}

/// Which definition a call `new C(..).m(..)` runs under the activated `seq`.
pub fn resolve_oracle(t: &Tables, seq: &LayerSeq, c: ClassName, m: MethodName) -> Option<Resolution> {
    search(t, seq, c, m, seq.len())
}

/// `super.m2(..)` from the definition at `from`: start over at the
/// superclass of the defining class with every activated layer.
pub fn resolve_super(t: &Tables, seq: &LayerSeq, from: &Resolution, m2: MethodName) -> Option<Resolution> {
    let sup = t.classes.get(&from.class)?.superclass;
    search(t, seq, sup, m2, seq.len())
}

/// `proceed(..)` from a partial method found at activated position `i`:
/// continue with the layers activated before `i`, then the base class.
pub fn resolve_proceed(t: &Tables, seq: &LayerSeq, from: &Resolution, m: MethodName) -> Option<Resolution> {
    let i = from.position?;
    search(t, seq, from.class, m, i)
}

/// `superproceed(..)` from a partial method: look in the superlayers of
/// the layer that defines it; the activated position is unchanged.
pub fn resolve_superproceed(t: &Tables, from: &Resolution, m: MethodName) -> Option<Resolution> {
    let defining = from.layer?;
    let parent = t.layers.get(&defining)?.superlayer;
    let found = in_layer_family(t, parent, from.class, m)?;
    Some(Resolution { class: from.class, layer: Some(found), position: from.position })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn seq(names: &[&str]) -> LayerSeq {
        LayerSeq::from_vec(names.iter().map(|n| LayerName::new(n)).collect())
    }

    #[test]
    fn empty_tables_resolve_nothing() {
        let p = parse_program("main { new Object() }").unwrap();
        assert_eq!(resolve_oracle(&p, &LayerSeq::empty(), "C".into(), "m".into()), None);
        assert_eq!(resolve_oracle(&p, &LayerSeq::empty(), ClassName::object(), "m".into()), None);
    }

    #[test]
    fn newest_layer_family_wins() {
        let p = parse_program(
            "class A extends Object { A m() { return this; } }
             layer P { A A.m() { return this; } } layer Q extends P {} layer R { A A.m() { return this; } }
             main { new A() }",
        )
        .unwrap();
        let r = resolve_oracle(&p, &seq(&["R", "Q"]), "A".into(), "m".into()).unwrap();
        assert_eq!((r.layer, r.position), (Some("P".into()), Some(1)));
        let next = resolve_proceed(&p, &seq(&["R", "Q"]), &r, "m".into()).unwrap();
        assert_eq!(next.layer, Some("R".into()));
        let base = resolve_proceed(&p, &seq(&["R", "Q"]), &next, "m".into()).unwrap();
        assert_eq!(base, Resolution { class: "A".into(), layer: None, position: None });
        assert_eq!(resolve_superproceed(&p, &r, "m".into()), None);
    }
}
