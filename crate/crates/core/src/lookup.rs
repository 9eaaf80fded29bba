//! Lookup functions (`fields`, `pmbody`, `mbody`, `pmtype`, `mtype`) and
//! the whole-table override predicates.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::*;
use crate::relations::{layer_chain, type_sub};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("unknown class {0}")]
    UnknownClass(ClassName),
    #[error("class {0} is on an extends cycle")]
    Cyclic(ClassName),
}

/// `fields(C)`: inherited fields first, then own fields, in declaration order.
pub fn fields(t: &Tables, c: ClassName) -> Result<&[(Type, FieldName)], LookupError> {
    let all = t.cache.fields.get_or_init(|| {
        let mut m = HashMap::new();
        m.insert(ClassName::object(), Ok(Vec::new()));
        for &c in t.classes.keys() {
            m.insert(c, compute_fields(t, c));
        }
        m
    });
    match all.get(&c) {
        Some(Ok(v)) => Ok(v),
        Some(Err(e)) => Err(e.clone()),
        None => Err(LookupError::UnknownClass(c)),
    }
}

fn compute_fields(t: &Tables, c: ClassName) -> Result<Vec<(Type, FieldName)>, LookupError> {
    let mut chain = Vec::new();
    let mut cur = c;
    while !cur.is_object() {
        let decl = t.class(cur).ok_or(LookupError::UnknownClass(cur))?;
        if chain.len() > t.classes.len() {
            return Err(LookupError::Cyclic(c));
        }
        chain.push(decl);
        cur = decl.superclass;
    }
    Ok(chain.iter().rev().flat_map(|d| d.fields.iter().map(|f| (f.ty, f.name))).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Signature {
    pub params: Vec<Type>,
    pub ret: Type,
}

impl Signature {
    fn of(params: &[Param], ret: Type) -> Signature {
        Signature { params: params.iter().map(|p| p.ty).collect(), ret }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.params.iter().map(Type::to_string).collect();
        write!(f, "({}) → {}", ps.join(", "), self.ret)
    }
}

/// Result of `pmbody(m, C, L)`.
#[derive(Clone, Debug)]
pub struct PmBody<'a> {
    pub params: Vec<VarName>,
    pub body: &'a Expr,
    pub decl: &'a PartialMethodDecl,
    /// The layer on `L`'s superlayer chain that declares `C.m`.
    pub found_layer: LayerName,
}

/// Where a method body was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BodyOrigin {
    Class,
    /// A partial method declared in this layer.
    Layer(LayerName),
}

/// Result of `mbody(m, C, L̄', L̄)`.
#[derive(Clone, Debug)]
pub struct MBody<'a> {
    pub params: Vec<VarName>,
    pub body: &'a Expr,
    pub found_class: ClassName,
    pub found_prefix: LayerSeq,
    pub origin: BodyOrigin,
}

impl MBody<'_> {
    /// Defining site as `C.m` or `L.C.m`.
    pub fn site(&self, m: MethodName) -> String {
        match self.origin {
            BodyOrigin::Class => format!("{}.{m}", self.found_class),
            BodyOrigin::Layer(l) => format!("{l}.{}.{m}", self.found_class),
        }
    }
}

fn pm_decl(t: &Tables, m: MethodName, c: ClassName, l: LayerName) -> Option<(&PartialMethodDecl, LayerName)> {
    layer_chain(t, l)
        .iter()
        .find_map(|&x| t.layer(x).and_then(|d| d.partial_methods.get(&(c, m))).map(|pm| (pm, x)))
}

/// `pmbody(m, C, L)`: search `L` and then its superlayers for `C.m`.
pub fn pmbody(t: &Tables, m: MethodName, c: ClassName, l: LayerName) -> Option<PmBody<'_>> {
    pm_decl(t, m, c, l).map(|(decl, found_layer)| PmBody {
        params: decl.params.iter().map(|p| p.name).collect(),
        body: &decl.body,
        decl,
        found_layer,
    })
}

/// `pmtype(m, C, L)`.
pub fn pmtype(t: &Tables, m: MethodName, c: ClassName, l: LayerName) -> Option<Signature> {
    pm_decl(t, m, c, l).map(|(d, _)| Signature::of(&d.params, d.ret))
}

/// `pmtype` together with the layer that declares it.
pub fn pmtype_site(t: &Tables, m: MethodName, c: ClassName, l: LayerName) -> Option<(Signature, LayerName)> {
    pm_decl(t, m, c, l).map(|(d, found)| (Signature::of(&d.params, d.ret), found))
}

/// `mbody(m, C, seq1, seq2)`: scan `seq1` right to left through `pmbody`,
/// then the base class, then restart at the superclass with `seq2`.
pub fn mbody<'a>(t: &'a Tables, m: MethodName, c: ClassName, seq1: &LayerSeq, seq2: &LayerSeq) -> Option<MBody<'a>> {
    debug_assert!(seq1.is_prefix_of(seq2));
    let mut class = c;
    let mut prefix = seq1.as_slice();
    for _ in 0..=t.classes.len() {
        for i in (0..prefix.len()).rev() {
            if let Some(pb) = pmbody(t, m, class, prefix[i]) {
                return Some(MBody {
                    params: pb.params,
                    body: pb.body,
                    found_class: class,
                    found_prefix: LayerSeq::from_vec(prefix[..=i].to_vec()),
                    origin: BodyOrigin::Layer(pb.found_layer),
                });
            }
        }
        let decl = t.class(class)?;
        if let Some(md) = decl.methods.get(&m) {
            return Some(MBody {
                params: md.params.iter().map(|p| p.name).collect(),
                body: &md.body,
                found_class: class,
                found_prefix: LayerSeq::empty(),
                origin: BodyOrigin::Class,
            });
        }
        class = decl.superclass;
        prefix = seq2.as_slice();
    }
    None
}

/// Which rule produced an `mtype` signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MTypeSource {
    /// A base method declared in the class.
    Class(ClassName),
    /// A partial method for `class`, reached from `via` and declared in `defined_in`.
    Layer { class: ClassName, via: LayerName, defined_in: LayerName },
}

impl fmt::Display for MTypeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MTypeSource::Class(c) => write!(f, "class {c}"),
            MTypeSource::Layer { class, via, defined_in } if via == defined_in => write!(f, "layer {via} for {class}"),
            MTypeSource::Layer { class, via, defined_in } => write!(f, "layer {defined_in} (via {via}) for {class}"),
        }
    }
}

/// `mtype` read as a relation: every derivable signature with its source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MType {
    Undefined,
    Defined(Signature, Vec<MTypeSource>),
    Conflict(Vec<(Signature, MTypeSource)>),
}

impl MType {
    pub fn defined(&self) -> Option<&Signature> {
        match self {
            MType::Defined(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, MType::Undefined)
    }

    /// All derivable signatures, defined or conflicting.
    pub fn signatures(&self) -> Vec<&Signature> {
        match self {
            MType::Undefined => vec![],
            MType::Defined(s, _) => vec![s],
            MType::Conflict(all) => all.iter().map(|(s, _)| s).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct MTypeKey(MethodName, ClassName, LayerSet, LayerSet);

/// `mtype(m, C, Λ1, Λ2)`.
pub fn mtype(t: &Tables, m: MethodName, c: ClassName, lam1: &LayerSet, lam2: &LayerSet) -> MType {
    let key = MTypeKey(m, c, lam1.clone(), lam2.clone());
    if let Some(hit) = t.cache.mtype.read().unwrap().get(&key) {
        return hit.clone();
    }
    let mut all = Vec::new();
    collect_mtype(t, m, c, lam1, lam2, 0, &mut all);
    let result = match all.first() {
        None => MType::Undefined,
        Some((s0, _)) if all.iter().all(|(s, _)| s == s0) => {
            MType::Defined(s0.clone(), all.iter().map(|(_, w)| w.clone()).collect())
        }
        Some(_) => MType::Conflict(all),
    };
    t.cache.mtype.write().unwrap().insert(key, result.clone());
    result
}

fn collect_mtype(
    t: &Tables,
    m: MethodName,
    c: ClassName,
    lam1: &LayerSet,
    lam2: &LayerSet,
    depth: usize,
    out: &mut Vec<(Signature, MTypeSource)>,
) {
    let Some(decl) = t.class(c) else { return };
    if let Some(md) = decl.methods.get(&m) {
        out.push((Signature::of(&md.params, md.ret), MTypeSource::Class(c)));
    }
    let before = out.len();
    for &l in lam1 {
        if let Some((sig, found)) = pmtype_site(t, m, c, l) {
            out.push((sig, MTypeSource::Layer { class: c, via: l, defined_in: found }));
        }
    }
    let layer_hit = out.len() > before;
    if !decl.methods.contains_key(&m) && !layer_hit && depth < t.classes.len() {
        collect_mtype(t, m, decl.superclass, lam2, lam2, depth + 1, out);
    }
}

/// A pair of partial methods `C.m` declared in two layers with different signatures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignatureClash {
    pub class: ClassName,
    pub method: MethodName,
    pub found: Signature,
    pub expected: Signature,
    pub expected_from: String,
}

pub fn noconflict_clashes(t: &Tables, l1: LayerName, l2: LayerName) -> Vec<SignatureClash> {
    let (Some(d1), Some(d2)) = (t.layer(l1), t.layer(l2)) else { return vec![] };
    d1.partial_methods
        .iter()
        .filter_map(|(key, pm1)| {
            let pm2 = d2.partial_methods.get(key)?;
            let (s1, s2) = (Signature::of(&pm1.params, pm1.ret), Signature::of(&pm2.params, pm2.ret));
            (s1 != s2).then(|| SignatureClash {
                class: key.0,
                method: key.1,
                found: s1,
                expected: s2,
                expected_from: format!("layer {l2}"),
            })
        })
        .collect()
}

/// `noconflict(L1, L2)`.
pub fn noconflict(t: &Tables, l1: LayerName, l2: LayerName) -> bool {
    noconflict_clashes(t, l1, l2).is_empty()
}

fn all_layers(t: &Tables) -> LayerSet {
    t.layers.keys().copied().collect()
}

pub fn override_h_clashes(t: &Tables, l: LayerName, c: ClassName) -> Vec<SignatureClash> {
    let Some(d) = t.layer(l) else { return vec![] };
    let dom = all_layers(t);
    let mut out = Vec::new();
    for pm in d.partial_methods.values().filter(|pm| pm.class == c) {
        let own = Signature::of(&pm.params, pm.ret);
        let witnesses = match mtype(t, pm.name, c, &LayerSet::new(), &dom) {
            MType::Undefined => vec![],
            MType::Defined(s, ws) => ws.into_iter().map(|w| (s.clone(), w)).take(1).collect(),
            MType::Conflict(all) => all,
        };
        for (s, w) in witnesses.into_iter().filter(|(s, _)| *s != own) {
            out.push(clash(c, pm.name, own.clone(), s, &w));
        }
    }
    out
}

fn clash(class: ClassName, method: MethodName, found: Signature, expected: Signature, from: &MTypeSource) -> SignatureClash {
    SignatureClash { class, method, found, expected, expected_from: from.to_string() }
}

/// `override^h(L, C)`: every partial method `C.m` in `L` matches the
/// signature `m` already has in `C` or its superclasses.
pub fn override_h(t: &Tables, l: LayerName, c: ClassName) -> bool {
    override_h_clashes(t, l, c).is_empty()
}

pub fn override_v_clashes(t: &Tables, c: ClassName) -> Vec<SignatureClash> {
    let Some(d) = t.class(c) else { return vec![] };
    let dom = all_layers(t);
    let mut out = Vec::new();
    for md in d.methods.values() {
        let own = Signature::of(&md.params, md.ret);
        let inherited: Vec<(Signature, MTypeSource)> = match mtype(t, md.name, d.superclass, &dom, &dom) {
            MType::Undefined => vec![],
            MType::Defined(s, ws) => ws.into_iter().map(|w| (s.clone(), w)).take(1).collect(),
            MType::Conflict(all) => all,
        };
        for (s, w) in inherited {
            if s.params != own.params || !type_sub(t, own.ret, s.ret) {
                out.push(clash(c, md.name, own.clone(), s, &w));
            }
        }
    }
    out
}

/// `override^v(C)`: base methods of `C` keep the parameter types of the
/// inherited signature and may only narrow the return type.
pub fn override_v(t: &Tables, c: ClassName) -> bool {
    override_v_clashes(t, c).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    const LOOKUP1: &str = "
        class U extends Object {}
        class E extends Object { U m() { return new U(); } }
        class D extends E { U m() { return new U(); } }
        class C extends D {}
        layer L1 { U D.m() { return new U(); } }
        layer L2 extends L3 { U E.m() { return new U(); } }
        layer L3 { U C.m() { return new U(); } }
        main { new C() }";

    fn seq(names: &[&str]) -> LayerSeq {
        LayerSeq::from_vec(names.iter().map(|n| LayerName::new(n)).collect())
    }

    #[test]
    fn fields_inherit_in_order() {
        let p = parse_program(
            "class T extends Object {} class S extends Object {}
             class A extends Object { T f; } class B extends A { S g; } main { new T() }",
        )
        .unwrap();
        let got = fields(&p, "B".into()).unwrap();
        assert_eq!(got, &[(Type::Class("T".into()), "f".into()), (Type::Class("S".into()), "g".into())]);
        assert!(fields(&p, ClassName::object()).unwrap().is_empty());
        assert_eq!(fields(&p, "Q".into()), Err(LookupError::UnknownClass("Q".into())));
    }

    #[test]
    fn pmbody_follows_superlayers() {
        let p = parse_program(LOOKUP1).unwrap();
        let m = MethodName::new("m");
        assert_eq!(pmbody(&p, m, "C".into(), "L2".into()).unwrap().found_layer, LayerName::new("L3"));
        assert!(pmbody(&p, m, "C".into(), "L1".into()).is_none());
        assert!(pmbody(&p, m, "C".into(), LayerName::base()).is_none());
    }

    #[test]
    fn mbody_examples() {
        let p = parse_program(LOOKUP1).unwrap();
        let m = MethodName::new("m");
        let r = mbody(&p, m, "C".into(), &seq(&["L1", "L2"]), &seq(&["L1", "L2"])).unwrap();
        assert_eq!((r.found_class, r.found_prefix.clone(), r.origin), ("C".into(), seq(&["L1", "L2"]), BodyOrigin::Layer("L3".into())));
        let r = mbody(&p, m, "C".into(), &seq(&["L1"]), &seq(&["L1"])).unwrap();
        assert_eq!(r.site(m), "L1.D.m");
        assert_eq!(r.found_prefix, seq(&["L1"]));
        let r = mbody(&p, m, "D".into(), &LayerSeq::empty(), &LayerSeq::empty()).unwrap();
        assert_eq!(r.site(m), "D.m");
        assert!(mbody(&p, "zz".into(), "C".into(), &seq(&["L1"]), &seq(&["L1"])).is_none());
    }

    #[test]
    fn mtype_conflict_and_noconflict() {
        let p = parse_program(
            "class A extends Object {} class B extends Object {} class C extends Object {}
             layer X { A C.m() { return new A(); } }
             layer Y { B C.m() { return new B(); } }
             main { new C() }",
        )
        .unwrap();
        let lam: LayerSet = ["X", "Y"].iter().map(|n| LayerName::new(n)).collect();
        assert!(matches!(mtype(&p, "m".into(), "C".into(), &lam, &lam), MType::Conflict(ref v) if v.len() == 2));
        assert!(!noconflict(&p, "X".into(), "Y".into()));
        assert!(noconflict(&p, "X".into(), "X".into()));
        let only_x: LayerSet = [LayerName::new("X")].into();
        assert_eq!(mtype(&p, "m".into(), "C".into(), &only_x, &only_x).defined().unwrap().ret, Type::Class("A".into()));
    }

    #[test]
    fn override_predicates() {
        let p = parse_program(
            "class A extends Object {} class B extends Object {}
             class C extends Object { A m() { return new A(); } }
             class D extends C { A m(B x) { return new A(); } }
             layer X { B C.m() { return new B(); } }
             main { new C() }",
        )
        .unwrap();
        assert!(!override_h(&p, "X".into(), "C".into()));
        assert!(override_h(&p, "X".into(), "D".into()));
        assert!(!override_v(&p, "D".into()));
        assert!(override_v(&p, "C".into()));
    }
}
