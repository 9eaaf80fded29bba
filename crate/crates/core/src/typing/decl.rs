//! Method, class, layer, table and program typing.

use std::collections::HashSet;

use super::{Checker, TypeError, TypeErrorCode};
use crate::ast::*;
use crate::lookup::{fields, noconflict_clashes, override_h_clashes, override_v_clashes, pmtype, SignatureClash};
use crate::relations::{layer_chain, set_weak_sub, type_sub};

fn at(code: TypeErrorCode, rule: &'static str, location: impl ToString, span: Span, message: String) -> TypeError {
    TypeError { code, rule, location: location.to_string(), span, message, related: Vec::new() }
}

impl Checker<'_> {
    fn check_body(&self, loc: Location, lam: &LayerSet, this: ClassName, params: &[Param], ret: Type, body: &Expr, span: Span, rule: &'static str) -> Result<(), TypeError> {
        let env = TypeEnv::for_method(this, params);
        let got = self.type_expr(&loc, lam, &env, body)?;
        if !type_sub(self.t, got, ret) {
            return Err(at(TypeErrorCode::ReturnType, rule, loc, span, format!("body has type {got}, declared return type is {ret}")));
        }
        self.mark(rule);
        Ok(())
    }

    /// T-Method: `C.m` typed with no active layers.
    pub fn check_method(&self, c: ClassName, md: &MethodDecl) -> Result<(), TypeError> {
        self.check_body(Location::Method(c, md.name), &LayerSet::new(), c, &md.params, md.ret, &md.body, md.span, "T-Method")
    }

    /// T-PMethod: `L.C.m` typed with `req(L) ∪ {L}` active.
    pub fn check_partial_method(&self, l: LayerName, pm: &PartialMethodDecl) -> Result<(), TypeError> {
        let mut lam = self.t.requires(l);
        lam.insert(l);
        self.check_body(Location::PartialMethod(l, pm.class, pm.name), &lam, pm.class, &pm.params, pm.ret, &pm.body, pm.span, "T-PMethod")
    }

    /// T-Class.
    pub fn check_class(&self, c: &ClassDecl) -> Vec<TypeError> {
        let mut out = Vec::new();
        match fields(self.t, c.superclass) {
            Err(e) => out.push(at(TypeErrorCode::BadFields, "T-Class", c.name, c.span, e.to_string())),
            Ok(inherited) => {
                let names: HashSet<FieldName> = inherited.iter().map(|(_, f)| *f).collect();
                for f in c.fields.iter().filter(|f| names.contains(&f.name)) {
                    out.push(at(
                        TypeErrorCode::DuplicateInheritedField,
                        "T-Class",
                        c.name,
                        f.span,
                        format!("field {} is already declared by a superclass", f.name),
                    ));
                }
            }
        }
        out.extend(c.methods.values().filter_map(|md| self.check_method(c.name, md).err()));
        if out.is_empty() {
            self.mark("T-Class");
        }
        out
    }

    /// T-Layer, or T-LayerSW when the layer sits strictly below a swappable layer.
    pub fn check_layer(&self, l: &LayerDecl) -> Vec<TypeError> {
        let t = self.t;
        let mut out = Vec::new();
        let sup = l.superlayer;
        let sw_above: Vec<LayerName> = layer_chain(t, l.name).iter().skip(1).copied().filter(|&x| t.is_swappable(x)).collect();
        let rule = if sw_above.is_empty() { "T-Layer" } else { "T-LayerSW" };
        let err = |code, span, msg: String| at(code, rule, l.name, span, msg);
        match sw_above.first() {
            None => {
                if !set_weak_sub(t, &l.requires, &t.requires(sup)) {
                    out.push(err(
                        TypeErrorCode::RequiresNotCovariant,
                        l.span,
                        format!(
                            "requires {} does not cover {} required by superlayer {sup}",
                            fmt_layer_set(&l.requires),
                            fmt_layer_set(&t.requires(sup))
                        ),
                    ));
                }
            }
            Some(&lsw) => {
                if l.swappable {
                    out.push(err(
                        TypeErrorCode::SwappableUnderSwappable,
                        l.span,
                        format!("swappable layer {} extends swappable layer {lsw}", l.name),
                    ));
                }
                if l.requires != t.requires(sup) {
                    out.push(err(
                        TypeErrorCode::SwappableRequiresChanged,
                        l.span,
                        format!(
                            "requires {} differs from {} required by superlayer {sup} under swappable {lsw}",
                            fmt_layer_set(&l.requires),
                            fmt_layer_set(&t.requires(sup))
                        ),
                    ));
                }
                for pm in l.partial_methods.values() {
                    if pmtype(t, pm.name, pm.class, lsw).is_none() {
                        out.push(err(
                            TypeErrorCode::SwappableNewMethod,
                            pm.span,
                            format!("partial method {}.{} is not declared by swappable {lsw}", pm.class, pm.name),
                        ));
                    }
                }
                for other in t.layers.values().filter(|o| o.requires.contains(&l.name)) {
                    out.push(err(
                        TypeErrorCode::SwappableRequired,
                        l.span,
                        format!("layer {} requires {}, which sits under swappable {lsw}", other.name, l.name),
                    ));
                }
            }
        }
        out.extend(l.partial_methods.values().filter_map(|pm| self.check_partial_method(l.name, pm).err()));
        if out.is_empty() {
            self.mark(rule);
        }
        out
    }

    /// T-Table: every class and layer, plus the three signature-agreement
    /// predicates. Reports every failure.
    pub fn check_tables(&self) -> Result<(), Vec<TypeError>> {
        let t = self.t;
        let mut out = Vec::new();
        for c in t.classes.values() {
            out.extend(self.check_class(c));
        }
        for l in t.layers.values() {
            out.extend(self.check_layer(l));
        }
        let layers: Vec<&LayerDecl> = t.layers.values().collect();
        for (i, l1) in layers.iter().enumerate() {
            for l2 in &layers[i + 1..] {
                for c in noconflict_clashes(t, l1.name, l2.name) {
                    out.push(clash_error(TypeErrorCode::SignatureConflict, format!("{} and {}", l1.name, l2.name), l1.span, &c, "noconflict"));
                }
            }
        }
        for l in &layers {
            for &c in t.classes.keys() {
                for cl in override_h_clashes(t, l.name, c) {
                    out.push(clash_error(TypeErrorCode::OverrideMismatch, Location::PartialMethod(l.name, c, cl.method), l.span, &cl, "override-h"));
                }
            }
        }
        for c in t.classes.values() {
            for cl in override_v_clashes(t, c.name) {
                out.push(clash_error(TypeErrorCode::OverrideMismatch, Location::Method(c.name, cl.method), c.span, &cl, "override-v"));
            }
        }
        if out.is_empty() {
            self.mark("T-Table");
            Ok(())
        } else {
            Err(out)
        }
    }

    /// T-Prog: the table is well typed and `main` types under no layers.
    pub fn check_program(&self, main: &Expr) -> Result<Type, Vec<TypeError>> {
        let mut errs = self.check_tables().err().unwrap_or_default();
        match self.type_expr(&Location::TopLevel, &LayerSet::new(), &TypeEnv::empty(), main) {
            Ok(ty) if errs.is_empty() => {
                self.mark("T-Prog");
                Ok(ty)
            }
            Ok(_) => Err(errs),
            Err(e) => {
                errs.push(e);
                Err(errs)
            }
        }
    }
}

fn clash_error(code: TypeErrorCode, loc: impl ToString, span: Span, c: &SignatureClash, predicate: &str) -> TypeError {
    at(
        code,
        "T-Table",
        loc,
        span,
        format!("{predicate}: {}.{} has signature {} but {} gives {}", c.class, c.method, c.found, c.expected_from, c.expected),
    )
}

pub fn check_method(t: &Tables, c: ClassName, md: &MethodDecl) -> Result<(), TypeError> {
    Checker::new(t).check_method(c, md)
}

pub fn check_partial_method(t: &Tables, l: LayerName, pm: &PartialMethodDecl) -> Result<(), TypeError> {
    Checker::new(t).check_partial_method(l, pm)
}

pub fn check_class(t: &Tables, c: &ClassDecl) -> Vec<TypeError> {
    Checker::new(t).check_class(c)
}

pub fn check_layer(t: &Tables, l: &LayerDecl) -> Vec<TypeError> {
    Checker::new(t).check_layer(l)
}

pub fn check_tables(t: &Tables) -> Result<(), Vec<TypeError>> {
    Checker::new(t).check_tables()
}

pub fn check_program(p: &Program) -> Result<Type, Vec<TypeError>> {
    Checker::new(p).check_program(&p.main)
}
