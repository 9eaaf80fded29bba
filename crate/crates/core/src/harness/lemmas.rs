//! Exhaustive checks, over a table's finite query grid, of the lookup
//! lemmas the soundness proof relies on, and of oracle agreement.

use std::fmt;

use super::oracle::resolve_oracle;
use crate::ast::*;
use crate::lookup::{mbody, mtype, pmbody, pmtype, BodyOrigin, MType};
use crate::relations::weak_sub;
use crate::typing::ndp;
use crate::typing::wf::wf_layer_set;

/// Sequences longer than this are skipped on tables with many layers.
pub const MAX_SEQ_LEN: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaViolation {
    pub lemma: &'static str,
    pub query: String,
    pub message: String,
}

impl fmt::Display for LemmaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.lemma, self.query, self.message)
    }
}

#[derive(Clone, Debug, Default)]
pub struct GridReport {
    pub queries: usize,
    pub violations: Vec<LemmaViolation>,
}

impl GridReport {
    fn fail(&mut self, lemma: &'static str, query: String, message: String) {
        self.violations.push(LemmaViolation { lemma, query, message });
    }
}

/// All duplicate-free sequences of the table's layers, up to
/// [`MAX_SEQ_LEN`] long (every sequence when there are at most that many).
pub fn layer_sequences(t: &Tables) -> Vec<LayerSeq> {
    let layers = t.layer_names();
    let mut out = vec![LayerSeq::empty()];
    let mut frontier = vec![Vec::<LayerName>::new()];
    for _ in 0..layers.len().min(MAX_SEQ_LEN) {
        let mut next = Vec::new();
        for s in &frontier {
            for &l in &layers {
                if !s.contains(&l) {
                    let mut v = s.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned().map(LayerSeq::from_vec));
        frontier = next;
    }
    out
}

fn grid_classes(t: &Tables) -> Vec<ClassName> {
    let mut v = vec![ClassName::object()];
    v.extend(t.classes.keys().copied());
    v
}

fn grid_methods(t: &Tables) -> Vec<MethodName> {
    let mut v: Vec<MethodName> = t
        .classes
        .values()
        .flat_map(|c| c.methods.keys().copied())
        .chain(t.layers.values().flat_map(|l| l.partial_methods.keys().map(|k| k.1)))
        .collect();
    v.sort();
    v.dedup();
    v
}

/// `mbody(m, C, L̄, L̄)` against the prose oracle, for every class, method
/// and layer sequence.
pub fn oracle_equivalence(t: &Tables) -> GridReport {
    let mut r = GridReport::default();
    for seq in layer_sequences(t) {
        for &c in &grid_classes(t) {
            for &m in &grid_methods(t) {
                r.queries += 1;
                let formal = mbody(t, m, c, &seq, &seq).map(|b| {
                    let layer = match b.origin {
                        BodyOrigin::Class => None,
                        BodyOrigin::Layer(l) => Some(l),
                    };
                    (b.found_class, layer)
                });
                let prose = resolve_oracle(t, &seq, c, m).map(|o| (o.class, o.layer));
                if formal != prose {
                    r.fail("oracle", format!("{c}.{m} under {seq}"), format!("mbody gives {formal:?}, oracle gives {prose:?}"));
                }
            }
        }
    }
    r
}

/// Lookup lemmas, meaningful on tables that pass the table check:
///
/// * pmtype stability: `L1 ≤w L2` and `pmtype(m,C,L2)` defined imply
///   `pmtype(m,C,L1)` is the same signature;
/// * `ndp(m,C,L̄',L̄)` implies `mtype(m,C,{L̄'},{L̄})` is defined;
/// * on a well-formed `{L̄}`, `mtype(m,C,{L̄},{L̄})` defined implies
///   `ndp(m,C,L̄,L̄)`;
/// * on a well-formed `{L̄}` with `L̄'` a prefix, `mtype(m,C,{L̄'},{L̄})`
///   defined implies `mbody(m,C,L̄',L̄)` is defined with matching arity, a
///   non-`Object` class, and a prefix that does not end in `Base`.
pub fn lemma_suite(t: &Tables) -> GridReport {
    let mut r = GridReport::default();
    let classes = grid_classes(t);
    let methods = grid_methods(t);
    let mut all_layers = t.layer_names();
    all_layers.push(LayerName::base());

    for &l1 in &all_layers {
        for &l2 in all_layers.iter().filter(|&&l2| weak_sub(t, l1, l2)) {
            for &c in &classes {
                for &m in &methods {
                    r.queries += 1;
                    if let Some(s2) = pmtype(t, m, c, l2) {
                        let s1 = pmtype(t, m, c, l1);
                        if s1.as_ref() != Some(&s2) {
                            r.fail("pmtype-stability", format!("{c}.{m} at {l1} ≤w {l2}"), format!("{s1:?} vs {s2}"));
                        }
                        let pb = pmbody(t, m, c, l1);
                        match pb {
                            Some(pb) if pb.params.len() == s2.params.len() && !pb.found_layer.is_base() => {}
                            _ => r.fail("pmtype-pmbody", format!("{c}.{m} at {l1}"), "pmbody missing or arity differs".into()),
                        }
                    }
                }
            }
        }
    }

    for full in layer_sequences(t) {
        let full_set = full.to_set();
        let wf = wf_layer_set(t, &full_set);
        for n in 0..=full.len() {
            let prefix = full.prefix(n);
            let prefix_set = prefix.to_set();
            for &c in &classes {
                for &m in &methods {
                    r.queries += 1;
                    let query = || format!("m={m} C={c} L̄'={prefix} L̄={full}");
                    let mt = mtype(t, m, c, &prefix_set, &full_set);
                    if ndp(t, m, c, &prefix, &full) && mt.defined().is_none() {
                        r.fail("ndp-mtype", query(), format!("ndp holds but mtype is {mt:?}"));
                    }
                    if matches!(mt, MType::Conflict(_)) {
                        r.fail("mtype-functional", query(), format!("{mt:?}"));
                    }
                    if !wf {
                        continue;
                    }
                    if n == full.len() && mt.defined().is_some() && !ndp(t, m, c, &prefix, &full) {
                        r.fail("mtype-ndp", query(), "mtype defined on a well-formed set but ndp fails".into());
                    }
                    if let Some(sig) = mt.defined() {
                        match mbody(t, m, c, &prefix, &full) {
                            None => r.fail("mtype-mbody", query(), "mtype defined but mbody undefined".into()),
                            Some(b) => {
                                if b.params.len() != sig.params.len() {
                                    r.fail("mtype-mbody", query(), format!("arity {} vs {}", b.params.len(), sig.params.len()));
                                }
                                if b.found_class.is_object() || b.found_prefix.last().is_some_and(LayerName::is_base) {
                                    r.fail("mtype-mbody", query(), format!("landed in {} with prefix {}", b.found_class, b.found_prefix));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    r
}
