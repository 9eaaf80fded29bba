//! Sanity conditions on class and layer tables.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::ast::*;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Sanity condition number (1-8), or `None` for the extra
    /// well-formedness checks (duplicates, misplaced calls, ...).
    pub condition: Option<u8>,
    pub location: String,
    pub message: String,
    #[serde(skip)]
    pub span: Span,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.condition {
            Some(n) => write!(f, "{}:{}: [sanity {n}] {}: {}", self.span.line, self.span.col, self.location, self.message),
            None => write!(f, "{}:{}: [sanity] {}: {}", self.span.line, self.span.col, self.location, self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn conditions(&self) -> BTreeSet<u8> {
        self.violations.iter().filter_map(|v| v.condition).collect()
    }

    pub(crate) fn push(&mut self, condition: Option<u8>, location: impl fmt::Display, span: Span, message: impl Into<String>) {
        self.violations.push(Violation {
            condition,
            location: location.to_string(),
            message: message.into(),
            span,
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_tables(p: &Program) -> ValidationReport {
    let mut r = ValidationReport::default();
    let t: &Tables = p;

    for (name, c) in &t.classes {
        if *name != c.name {
            r.push(Some(1), name, c.span, format!("table entry {name} holds class {}", c.name));
        }
        if name.is_object() {
            r.push(Some(2), name, c.span, "Object cannot be declared");
        }
        if t.layers.contains_key(&LayerName::new(name.as_str())) || name.as_str() == "Base" {
            r.push(None, name, c.span, format!("{name} names both a class and a layer"));
        }
    }
    for (name, l) in &t.layers {
        if *name != l.name {
            r.push(Some(4), name, l.span, format!("table entry {name} holds layer {}", l.name));
        }
        if name.is_base() {
            r.push(Some(5), name, l.span, "Base cannot be declared");
        }
        if name.as_str() == "Object" {
            r.push(None, name, l.span, "Object names both a class and a layer");
        }
    }

    // 3 and 6: every referenced name resolves.
    for c in t.classes.values() {
        check_class_ref(&mut r, t, c.superclass, &c.name, c.span);
        let mut seen = HashSet::new();
        for f in &c.fields {
            check_type(&mut r, t, f.ty, &c.name, f.span);
            if !seen.insert(f.name) {
                r.push(None, c.name, f.span, format!("duplicate field {}", f.name));
            }
        }
        for m in c.methods.values() {
            let loc = Location::Method(c.name, m.name);
            check_signature(&mut r, t, m.ret, &m.params, &loc, m.span);
            check_body(&mut r, t, &m.body, &loc);
        }
    }
    for l in t.layers.values() {
        check_layer_ref(&mut r, t, l.superlayer, &l.name, l.span);
        for req in &l.requires {
            check_layer_ref(&mut r, t, *req, &l.name, l.span);
        }
        if l.requires.contains(&l.name) {
            r.push(None, l.name, l.span, format!("layer {} requires itself", l.name));
        }
        for pm in l.partial_methods.values() {
            let loc = Location::PartialMethod(l.name, pm.class, pm.name);
            if pm.class.is_object() {
                r.push(Some(8), loc, pm.span, "a layer cannot add a partial method to Object");
            } else {
                check_class_ref(&mut r, t, pm.class, &loc, pm.span);
            }
            check_signature(&mut r, t, pm.ret, &pm.params, &loc, pm.span);
            check_body(&mut r, t, &pm.body, &loc);
        }
    }
    check_body(&mut r, t, &p.main, &Location::TopLevel);

    // 7: acyclic extends.
    for c in t.classes.values() {
        let mut seen = HashSet::new();
        let mut cur = c.name;
        while let Some(d) = t.class(cur) {
            if !seen.insert(cur) {
                r.push(Some(7), c.name, c.span, format!("class {} is on an extends cycle", c.name));
                break;
            }
            cur = d.superclass;
        }
    }
    for l in t.layers.values() {
        let mut seen = HashSet::new();
        let mut cur = l.name;
        while let Some(d) = t.layer(cur) {
            if !seen.insert(cur) {
                r.push(Some(7), l.name, l.span, format!("layer {} is on an extends cycle", l.name));
                break;
            }
            cur = d.superlayer;
        }
    }
    r
}

fn check_class_ref(r: &mut ValidationReport, t: &Tables, c: ClassName, loc: &dyn fmt::Display, span: Span) {
    if !t.is_class_name(c) {
        r.push(Some(3), loc, span, format!("unknown class {c}"));
    }
}

fn check_layer_ref(r: &mut ValidationReport, t: &Tables, l: LayerName, loc: &dyn fmt::Display, span: Span) {
    if !t.is_layer_name(l) {
        r.push(Some(6), loc, span, format!("unknown layer {l}"));
    }
}

fn check_type(r: &mut ValidationReport, t: &Tables, ty: Type, loc: &dyn fmt::Display, span: Span) {
    match ty {
        Type::Class(c) => check_class_ref(r, t, c, loc, span),
        Type::Layer(l) => check_layer_ref(r, t, l, loc, span),
    }
}

fn check_signature(r: &mut ValidationReport, t: &Tables, ret: Type, params: &[Param], loc: &Location, span: Span) {
    check_type(r, t, ret, loc, span);
    let mut seen = HashSet::new();
    for p in params {
        check_type(r, t, p.ty, loc, span);
        if p.name == VarName::this() {
            r.push(None, loc, span, "parameter cannot be named this");
        } else if !seen.insert(p.name) {
            r.push(None, loc, span, format!("duplicate parameter {}", p.name));
        }
    }
}

fn check_body(r: &mut ValidationReport, t: &Tables, body: &Expr, loc: &Location) {
    body.walk(&mut |e| match &e.kind {
        ExprKind::New(c, _) => check_class_ref(r, t, *c, loc, e.span),
        ExprKind::NewLayer(l) => check_layer_ref(r, t, *l, loc, e.span),
        ExprKind::Swap(_, lsw, _) => check_layer_ref(r, t, *lsw, loc, e.span),
        ExprKind::Proceed(_) | ExprKind::SuperProceed(_) if !matches!(loc, Location::PartialMethod(..)) => {
            r.push(None, loc, e.span, "proceed/superproceed outside a partial method");
        }
        ExprKind::InvokeA { .. } => r.push(None, loc, e.span, "runtime invocation form in source"),
        _ => {}
    });
}
