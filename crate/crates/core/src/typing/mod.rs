//! Expression typing (source and runtime forms) and declaration checking.

mod decl;
pub mod wf;

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::ast::*;
use crate::lookup::{fields, mtype, pmtype, pmbody, MType, Signature};
use crate::relations::{class_sub, set_sw_sub, set_weak_sub, type_sub, weak_sub};
use self::wf::{replay_witness, wf_layer_set, WitnessLedger};

pub use self::decl::{check_class, check_layer, check_method, check_partial_method, check_program, check_tables};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeErrorCode {
    UnboundVariable,
    NotAnObject,
    NotALayer,
    NoSuchField,
    BadFields,
    MethodUndefined,
    MethodConflict,
    ArgumentCount,
    ArgumentType,
    ReturnType,
    RequiresUnsatisfied,
    NotSwappable,
    NotUnderSwappable,
    MisplacedCall,
    SuperproceedUndefined,
    CursorIllFormed,
    ActiveSetMismatch,
    RequiresNotCovariant,
    SwappableRequiresChanged,
    SwappableNewMethod,
    SwappableRequired,
    SwappableUnderSwappable,
    DuplicateInheritedField,
    SignatureConflict,
    OverrideMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeError {
    pub code: TypeErrorCode,
    /// Typing rule whose premise failed.
    pub rule: &'static str,
    pub location: String,
    #[serde(skip)]
    pub span: Span,
    pub message: String,
    /// Further facts worth showing (conflicting signatures, ...).
    pub related: Vec<String>,
}

impl TypeError {
    fn new(code: TypeErrorCode, rule: &'static str, loc: &Location, span: Span, message: impl Into<String>) -> TypeError {
        TypeError { code, rule, location: loc.to_string(), span, message: message.into(), related: Vec::new() }
    }

    fn related(mut self, r: Vec<String>) -> TypeError {
        self.related = r;
        self
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule, self.location, self.message)?;
        for r in &self.related {
            write!(f, "; {r}")?;
        }
        Ok(())
    }
}

impl std::error::Error for TypeError {}

/// The typing judgment `ℒ; Λ; Γ ⊢ e : T` over one table.
///
/// Layer-set well-formedness (needed by runtime cursors) is decided from a
/// witness ledger when one is attached and the set is recorded there, and
/// by search otherwise.
pub struct Checker<'a> {
    t: &'a Tables,
    ledger: Option<&'a WitnessLedger>,
    used: Option<RefCell<BTreeSet<&'static str>>>,
}

impl<'a> Checker<'a> {
    pub fn new(t: &'a Tables) -> Checker<'a> {
        Checker { t, ledger: None, used: None }
    }

    pub fn with_ledger(mut self, ledger: &'a WitnessLedger) -> Checker<'a> {
        self.ledger = Some(ledger);
        self
    }

    /// Record the name of every rule used in a successful derivation.
    pub fn with_coverage(mut self) -> Checker<'a> {
        self.used = Some(RefCell::new(BTreeSet::new()));
        self
    }

    pub fn rules_used(&self) -> BTreeSet<&'static str> {
        self.used.as_ref().map(|u| u.borrow().clone()).unwrap_or_default()
    }

    pub fn tables(&self) -> &'a Tables {
        self.t
    }

    pub(crate) fn mark(&self, rule: &'static str) {
        if let Some(u) = &self.used {
            u.borrow_mut().insert(rule);
        }
    }

    /// `Λ WF`.
    pub fn wf(&self, lam: &LayerSet) -> bool {
        if let Some(w) = self.ledger.and_then(|l| l.get(lam)) {
            return replay_witness(self.t, w).is_ok_and(|got| got == *lam);
        }
        wf_layer_set(self.t, lam)
    }

    pub fn type_expr(&self, loc: &Location, lam: &LayerSet, env: &TypeEnv, e: &Expr) -> Result<Type, TypeError> {
        use TypeErrorCode::*;
        let t = self.t;
        let err = |code, rule, msg: String| TypeError::new(code, rule, loc, e.span, msg);
        match &e.kind {
            ExprKind::Var(x) => {
                let ty = env.get(*x).ok_or_else(|| err(UnboundVariable, "T-Var", format!("unbound variable {x}")))?;
                self.mark("T-Var");
                Ok(ty)
            }
            ExprKind::Field(e0, f) => {
                let c0 = self.class_of(loc, lam, env, e0, "T-Field")?;
                let fs = fields(t, c0).map_err(|x| err(BadFields, "T-Field", x.to_string()))?;
                let ty = fs
                    .iter()
                    .find(|(_, g)| g == f)
                    .map(|(ty, _)| *ty)
                    .ok_or_else(|| err(NoSuchField, "T-Field", format!("class {c0} has no field {f}")))?;
                self.mark("T-Field");
                Ok(ty)
            }
            ExprKind::Invoke(e0, m, args) => {
                let c0 = self.class_of(loc, lam, env, e0, "T-Invk")?;
                let sig = self.defined(loc, e.span, "T-Invk", *m, c0, lam, lam)?;
                self.args(loc, lam, env, args, &sig, e.span, "T-Invk", &format!("{c0}.{m}"))?;
                self.mark("T-Invk");
                Ok(sig.ret)
            }
            ExprKind::New(c, args) => {
                let fs = fields(t, *c).map_err(|x| err(BadFields, "T-New", x.to_string()))?;
                if fs.len() != args.len() {
                    return Err(err(
                        ArgumentCount,
                        "T-New",
                        format!("new {c} takes {} argument(s), got {}", fs.len(), args.len()),
                    ));
                }
                for ((fty, fname), a) in fs.iter().zip(args) {
                    let aty = self.type_expr(loc, lam, env, a)?;
                    if !type_sub(t, aty, *fty) {
                        return Err(TypeError::new(
                            ArgumentType,
                            "T-New",
                            loc,
                            a.span,
                            format!("field {c}.{fname} has type {fty}, argument has type {aty}"),
                        ));
                    }
                }
                self.mark("T-New");
                Ok(Type::Class(*c))
            }
            ExprKind::NewLayer(l) => {
                if !t.is_layer_name(*l) {
                    return Err(err(NotALayer, "T-NewL", format!("unknown layer {l}")));
                }
                self.mark("T-NewL");
                Ok(Type::Layer(*l))
            }
            ExprKind::With(el, body) => {
                let l = self.layer_of(loc, lam, env, el, "T-With")?;
                let req = t.requires(l);
                if !set_weak_sub(t, lam, &req) {
                    return Err(err(
                        RequiresUnsatisfied,
                        "T-With",
                        format!("activating {l} needs {} but only {} is active", fmt_layer_set(&req), fmt_layer_set(lam)),
                    ));
                }
                let mut inner = lam.clone();
                inner.insert(l);
                let ty = self.type_expr(loc, &inner, env, body)?;
                self.mark("T-With");
                Ok(ty)
            }
            ExprKind::Swap(el, lsw, body) => {
                let l = self.layer_of(loc, lam, env, el, "T-Swap")?;
                if !t.is_swappable(*lsw) {
                    return Err(err(NotSwappable, "T-Swap", format!("layer {lsw} is not swappable")));
                }
                if !weak_sub(t, l, *lsw) {
                    return Err(err(NotUnderSwappable, "T-Swap", format!("{l} is not a sublayer of {lsw}")));
                }
                let mut rm: LayerSet = lam.iter().copied().filter(|&x| !weak_sub(t, x, *lsw)).collect();
                let req = t.requires(l);
                if !set_weak_sub(t, &rm, &req) {
                    return Err(err(
                        RequiresUnsatisfied,
                        "T-Swap",
                        format!("swapping in {l} needs {} but only {} remains", fmt_layer_set(&req), fmt_layer_set(&rm)),
                    ));
                }
                rm.insert(l);
                let ty = self.type_expr(loc, &rm, env, body)?;
                self.mark("T-Swap");
                Ok(ty)
            }
            ExprKind::Super(m2, args) => {
                let (rule, class, lam_s) = match *loc {
                    Location::Method(c, _) => ("T-SuperB", c, LayerSet::new()),
                    Location::PartialMethod(l, c, _) => {
                        let mut s = t.requires(l);
                        s.insert(l);
                        ("T-SuperP", c, s)
                    }
                    Location::TopLevel => {
                        return Err(err(MisplacedCall, "T-SuperB", "super call outside a method".into()));
                    }
                };
                let sup = t
                    .superclass(class)
                    .ok_or_else(|| err(MethodUndefined, rule, format!("{class} has no superclass")))?;
                let sig = self.defined(loc, e.span, rule, *m2, sup, &lam_s, &lam_s)?;
                self.args(loc, lam, env, args, &sig, e.span, rule, &format!("super.{m2}"))?;
                self.mark(rule);
                Ok(sig.ret)
            }
            ExprKind::Proceed(args) => {
                let Location::PartialMethod(l, c, m) = *loc else {
                    return Err(err(MisplacedCall, "T-Proceed", "proceed outside a partial method".into()));
                };
                let req = t.requires(l);
                let mut with_l = req.clone();
                with_l.insert(l);
                let sig = self.defined(loc, e.span, "T-Proceed", m, c, &req, &with_l)?;
                self.args(loc, lam, env, args, &sig, e.span, "T-Proceed", "proceed")?;
                self.mark("T-Proceed");
                Ok(sig.ret)
            }
            ExprKind::SuperProceed(args) => {
                let Location::PartialMethod(l, c, m) = *loc else {
                    return Err(err(MisplacedCall, "T-SuperProceed", "superproceed outside a partial method".into()));
                };
                let sup = t.superlayer(l).unwrap_or_else(LayerName::base);
                let sig = pmtype(t, m, c, sup).ok_or_else(|| {
                    err(SuperproceedUndefined, "T-SuperProceed", format!("no partial method {c}.{m} in {sup} or its superlayers"))
                })?;
                self.args(loc, lam, env, args, &sig, e.span, "T-SuperProceed", "superproceed")?;
                self.mark("T-SuperProceed");
                Ok(sig.ret)
            }
            ExprKind::InvokeA { recv, cursor, method, args } => self.type_invoke_a(loc, lam, env, e, recv, cursor, *method, args),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn type_invoke_a(
        &self,
        loc: &Location,
        lam: &LayerSet,
        env: &TypeEnv,
        e: &Expr,
        recv: &ObjValue,
        cursor: &Cursor,
        m: MethodName,
        args: &[Expr],
    ) -> Result<Type, TypeError> {
        use TypeErrorCode::*;
        let t = self.t;
        let c0 = match self.type_expr(loc, lam, env, &Value::Obj(recv.clone()).to_expr())? {
            Type::Class(c) => c,
            Type::Layer(l) => return Err(TypeError::new(NotAnObject, "T-InvkA", loc, e.span, format!("receiver has layer type {l}"))),
        };
        let full = cursor.full().to_set();
        let (rule, sig) = match cursor {
            Cursor::Triple { class, prefix, full: seq } => {
                self.cursor_ok(loc, e.span, "T-InvkA", c0, m, *class, prefix, seq)?;
                self.sw_covered(loc, e.span, "T-InvkA", lam, &full)?;
                let sig = self.defined(loc, e.span, "T-InvkA", m, *class, &prefix.to_set(), &full)?;
                ("T-InvkA", sig)
            }
            Cursor::Quad { class, layer, prefix, full: seq } => {
                let Some(l0) = prefix.last() else {
                    return Err(TypeError::new(CursorIllFormed, "T-InvkAL", loc, e.span, format!("cursor {cursor} has an empty prefix")));
                };
                self.cursor_ok(loc, e.span, "T-InvkAL", c0, m, *class, prefix, seq)?;
                self.sw_covered(loc, e.span, "T-InvkAL", lam, &full)?;
                if !weak_sub(t, l0, *layer) {
                    return Err(TypeError::new(
                        CursorIllFormed,
                        "T-InvkAL",
                        loc,
                        e.span,
                        format!("last prefix layer {l0} is not a weak sublayer of {layer}"),
                    ));
                }
                let sig = pmtype(t, m, *class, *layer).ok_or_else(|| {
                    TypeError::new(MethodUndefined, "T-InvkAL", loc, e.span, format!("no partial method {class}.{m} from {layer}"))
                })?;
                ("T-InvkAL", sig)
            }
        };
        self.args(loc, lam, env, args, &sig, e.span, rule, &format!("{c0}.{m}"))?;
        self.mark(rule);
        Ok(sig.ret)
    }

    /// Wf-Cursor: `C.m ⊢ <D, L̄', L̄> ok`.
    #[allow(clippy::too_many_arguments)]
    fn cursor_ok(
        &self,
        loc: &Location,
        span: Span,
        rule: &'static str,
        c: ClassName,
        m: MethodName,
        d: ClassName,
        prefix: &LayerSeq,
        full: &LayerSeq,
    ) -> Result<(), TypeError> {
        let fail = |msg: String| TypeError::new(TypeErrorCode::CursorIllFormed, rule, loc, span, msg);
        if !class_sub(self.t, c, d) {
            return Err(fail(format!("receiver class {c} is not a subclass of cursor class {d}")));
        }
        if !prefix.is_prefix_of(full) {
            return Err(fail(format!("{prefix} is not a prefix of {full}")));
        }
        if !self.wf(&full.to_set()) {
            return Err(fail(format!("active set {} is not well formed", fmt_layer_set(&full.to_set()))));
        }
        if !ndp(self.t, m, d, prefix, full) {
            return Err(fail(format!("no proceed-free definition of {m} reachable from {d}")));
        }
        self.mark("Wf-Cursor");
        Ok(())
    }

    fn sw_covered(&self, loc: &Location, span: Span, rule: &'static str, lam: &LayerSet, full: &LayerSet) -> Result<(), TypeError> {
        if set_sw_sub(self.t, lam, full) {
            Ok(())
        } else {
            Err(TypeError::new(
                TypeErrorCode::ActiveSetMismatch,
                rule,
                loc,
                span,
                format!("{} does not cover the cursor's {} up to swapping", fmt_layer_set(lam), fmt_layer_set(full)),
            ))
        }
    }

    fn class_of(&self, loc: &Location, lam: &LayerSet, env: &TypeEnv, e: &Expr, rule: &'static str) -> Result<ClassName, TypeError> {
        match self.type_expr(loc, lam, env, e)? {
            Type::Class(c) => Ok(c),
            Type::Layer(l) => {
                Err(TypeError::new(TypeErrorCode::NotAnObject, rule, loc, e.span, format!("expected an object, found layer type {l}")))
            }
        }
    }

    fn layer_of(&self, loc: &Location, lam: &LayerSet, env: &TypeEnv, e: &Expr, rule: &'static str) -> Result<LayerName, TypeError> {
        match self.type_expr(loc, lam, env, e)? {
            Type::Layer(l) => Ok(l),
            Type::Class(c) => {
                Err(TypeError::new(TypeErrorCode::NotALayer, rule, loc, e.span, format!("expected a layer instance, found class type {c}")))
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn defined(
        &self,
        loc: &Location,
        span: Span,
        rule: &'static str,
        m: MethodName,
        c: ClassName,
        lam1: &LayerSet,
        lam2: &LayerSet,
    ) -> Result<Signature, TypeError> {
        match mtype(self.t, m, c, lam1, lam2) {
            MType::Defined(sig, _) => Ok(sig),
            MType::Undefined => Err(TypeError::new(
                TypeErrorCode::MethodUndefined,
                rule,
                loc,
                span,
                format!("mtype({m}, {c}, {}, {}) is undefined", fmt_layer_set(lam1), fmt_layer_set(lam2)),
            )),
            MType::Conflict(all) => Err(TypeError::new(
                TypeErrorCode::MethodConflict,
                rule,
                loc,
                span,
                format!("{c}.{m} has conflicting signatures under {}", fmt_layer_set(lam1)),
            )
            .related(all.iter().map(|(s, w)| format!("{s} from {w}")).collect())),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn args(
        &self,
        loc: &Location,
        lam: &LayerSet,
        env: &TypeEnv,
        args: &[Expr],
        sig: &Signature,
        span: Span,
        rule: &'static str,
        what: &str,
    ) -> Result<(), TypeError> {
        if args.len() != sig.params.len() {
            return Err(TypeError::new(
                TypeErrorCode::ArgumentCount,
                rule,
                loc,
                span,
                format!("{what} takes {} argument(s), got {}", sig.params.len(), args.len()),
            ));
        }
        for (i, (a, want)) in args.iter().zip(&sig.params).enumerate() {
            let got = self.type_expr(loc, lam, env, a)?;
            if !type_sub(self.t, got, *want) {
                return Err(TypeError::new(
                    TypeErrorCode::ArgumentType,
                    rule,
                    loc,
                    a.span,
                    format!("argument {} of {what} has type {got}, expected {want}", i + 1),
                ));
            }
        }
        Ok(())
    }
}

/// `ℒ; Λ; Γ ⊢ e : T` with well-formedness decided by search.
pub fn type_expr(t: &Tables, loc: &Location, lam: &LayerSet, env: &TypeEnv, e: &Expr) -> Result<Type, TypeError> {
    Checker::new(t).type_expr(loc, lam, env, e)
}

pub fn contains_proceed(e: &Expr) -> bool {
    e.any(|k| matches!(k, ExprKind::Proceed(_)))
}

/// `ndp(m, D, L̄1, L̄2)`: looking up `m` from the cursor reaches a
/// definition that does not `proceed` (so lookup cannot fall off the end).
pub fn ndp(t: &Tables, m: MethodName, d: ClassName, seq1: &LayerSeq, seq2: &LayerSeq) -> bool {
    let mut class = d;
    let mut prefix = seq1;
    for _ in 0..=t.classes.len() {
        let Some(decl) = t.class(class) else { return false };
        if decl.methods.contains_key(&m) {
            return true;
        }
        if prefix.iter().any(|l| pmbody(t, m, class, l).is_some_and(|pb| !contains_proceed(pb.body))) {
            return true;
        }
        class = decl.superclass;
        prefix = seq2;
    }
    false
}
