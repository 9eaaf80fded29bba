//! Small-step evaluator with derivation-path tracing.
//!
//! Strategy: leftmost-innermost call-by-value. Receivers before arguments,
//! arguments left to right, the layer expression of `with`/`swap` before
//! the body.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::*;
use crate::lookup::{fields, mbody, pmbody, BodyOrigin};
use crate::relations::weak_sub;

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// Fuel default, overridable through `CFJ_MAX_STEPS`.
pub fn default_max_steps() -> usize {
    std::env::var("CFJ_MAX_STEPS").ok().and_then(|s| s.trim().parse().ok()).filter(|&n| n > 0).unwrap_or(DEFAULT_MAX_STEPS)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleName {
    RField,
    RInvk,
    RInvkB,
    RInvkP,
    RInvkSP,
    RcWith,
    RcSwap,
    RcWithArg,
    RcSwapArg,
    RWithVal,
    RSwapVal,
    RcField,
    RcInvkArg,
    RcInvkRecv,
    RcNew,
    RcInvkAArg1,
    RcInvkAArg2,
}

impl RuleName {
    pub const ALL: [RuleName; 17] = [
        RuleName::RField,
        RuleName::RInvk,
        RuleName::RInvkB,
        RuleName::RInvkP,
        RuleName::RInvkSP,
        RuleName::RcWith,
        RuleName::RcSwap,
        RuleName::RcWithArg,
        RuleName::RcSwapArg,
        RuleName::RWithVal,
        RuleName::RSwapVal,
        RuleName::RcField,
        RuleName::RcInvkArg,
        RuleName::RcInvkRecv,
        RuleName::RcNew,
        RuleName::RcInvkAArg1,
        RuleName::RcInvkAArg2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleName::RField => "R-Field",
            RuleName::RInvk => "R-Invk",
            RuleName::RInvkB => "R-InvkB",
            RuleName::RInvkP => "R-InvkP",
            RuleName::RInvkSP => "R-InvkSP",
            RuleName::RcWith => "RC-With",
            RuleName::RcSwap => "RC-Swap",
            RuleName::RcWithArg => "RC-WithArg",
            RuleName::RcSwapArg => "RC-SwapArg",
            RuleName::RWithVal => "R-WithVal",
            RuleName::RSwapVal => "R-SwapVal",
            RuleName::RcField => "RC-Field",
            RuleName::RcInvkArg => "RC-InvkArg",
            RuleName::RcInvkRecv => "RC-InvkRecv",
            RuleName::RcNew => "RC-New",
            RuleName::RcInvkAArg1 => "RC-InvkAArg1",
            RuleName::RcInvkAArg2 => "RC-InvkAArg2",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleName> {
        RuleName::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("layer {0} is not swappable")]
    NotSwappable(LayerName),
}

/// `with(L, L̄) = (L̄ \ {L}); L`.
pub fn with_fn(l: LayerName, seq: &LayerSeq) -> LayerSeq {
    let mut out = seq.clone();
    out.retain(|&x| x != l);
    out.push_unique(l);
    out
}

/// `swap(L, Lsw, L̄)`: drop every weak sublayer of `lsw`, then append `l`.
pub fn swap_fn(t: &Tables, l: LayerName, lsw: LayerName, seq: &LayerSeq) -> Result<LayerSeq, SemanticsError> {
    if !t.is_swappable(lsw) {
        return Err(SemanticsError::NotSwappable(lsw));
    }
    Ok(swap_unchecked(t, l, lsw, seq))
}

fn swap_unchecked(t: &Tables, l: LayerName, lsw: LayerName, seq: &LayerSeq) -> LayerSeq {
    let mut out = seq.clone();
    out.retain(|&x| !weak_sub(t, x, lsw));
    // `l` may survive the removal when it is not itself under `lsw`.
    out.retain(|&x| x != l);
    out.push_unique(l);
    out
}

/// A `with` or `swap` descent on the way to a redex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ActivationEvent {
    With(LayerName),
    Swap(LayerName, LayerName),
}

impl ActivationEvent {
    pub fn apply(&self, t: &Tables, seq: &LayerSeq) -> LayerSeq {
        match *self {
            ActivationEvent::With(l) => with_fn(l, seq),
            ActivationEvent::Swap(l, lsw) => swap_unchecked(t, l, lsw, seq),
        }
    }
}

impl fmt::Display for ActivationEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationEvent::With(l) => write!(f, "with {l}"),
            ActivationEvent::Swap(l, lsw) => write!(f, "swap {l} for {lsw}"),
        }
    }
}

/// A resolved definition: base method `C.m` or partial method `L.C.m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Site {
    pub layer: Option<LayerName>,
    pub class: ClassName,
    pub method: MethodName,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            Some(l) => write!(f, "{l}.{}.{}", self.class, self.method),
            None => write!(f, "{}.{}", self.class, self.method),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CallKind {
    Proceed,
    Super,
    SuperProceed,
}

impl fmt::Display for CallKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CallKind::Proceed => "proceed",
            CallKind::Super => "super",
            CallKind::SuperProceed => "superproceed",
        })
    }
}

/// One method entry: the cursor that was resolved, where it landed, and
/// the cursors substituted for `proceed`/`super`/`superproceed` calls that
/// occur in the entered body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dispatch {
    pub rule: RuleName,
    pub receiver: ClassName,
    pub method: MethodName,
    pub cursor: Cursor,
    pub site: Site,
    pub spawned: Vec<(CallKind, Cursor, MethodName)>,
}

impl fmt::Display for Dispatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}.{} {} => {}", self.rule, self.receiver, self.method, self.cursor, self.site)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StuckReason {
    FreeVariable { name: String },
    UnknownClass { class: String },
    NoSuchField { class: String, field: String },
    FieldArity { class: String, expected: usize, found: usize },
    NotAnObject { expr: String },
    NotALayer { expr: String },
    MethodNotFound { method: String, cursor: String },
    PartialMethodNotFound { method: String, class: String, layer: String },
    EmptySuperproceedPrefix { cursor: String },
    ArgumentArity { site: String, expected: usize, found: usize },
    Unresolved { call: String },
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StuckReason::FreeVariable { name } => write!(f, "free variable {name}"),
            StuckReason::UnknownClass { class } => write!(f, "unknown class {class}"),
            StuckReason::NoSuchField { class, field } => write!(f, "class {class} has no field {field}"),
            StuckReason::FieldArity { class, expected, found } => {
                write!(f, "new {class} has {found} argument(s) but {expected} field(s)")
            }
            StuckReason::NotAnObject { expr } => write!(f, "{expr} is not an object"),
            StuckReason::NotALayer { expr } => write!(f, "{expr} is not a layer instance"),
            StuckReason::MethodNotFound { method, cursor } => write!(f, "mbody undefined for {method} at {cursor}"),
            StuckReason::PartialMethodNotFound { method, class, layer } => {
                write!(f, "pmbody undefined for {class}.{method} from layer {layer}")
            }
            StuckReason::EmptySuperproceedPrefix { cursor } => write!(f, "superproceed cursor {cursor} has an empty prefix"),
            StuckReason::ArgumentArity { site, expected, found } => {
                write!(f, "{site} takes {expected} argument(s), got {found}")
            }
            StuckReason::Unresolved { call } => write!(f, "{call} was never substituted"),
        }
    }
}

/// Deliberate evaluator faults, used only to check that the soundness
/// harness notices a broken evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Method entry forgets to substitute parameters.
    SkipArgSubst,
}

#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    pub max_steps: usize,
    pub fault: Option<Fault>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { max_steps: default_max_steps(), fault: None }
    }
}

/// A successful step.
#[derive(Clone, Debug)]
pub struct Step {
    pub expr: Expr,
    /// Rules from the conclusion down to the axiom.
    pub path: Vec<RuleName>,
    /// Active sequence at the redex.
    pub active: LayerSeq,
    /// `with`/`swap` descents from the top-level sequence to the redex.
    pub events: Vec<ActivationEvent>,
    pub dispatch: Option<Dispatch>,
}

impl Step {
    /// The rule concluding the derivation.
    pub fn rule(&self) -> RuleName {
        self.path[0]
    }

    pub fn path_string(&self) -> String {
        self.path.iter().map(|r| r.as_str()).collect::<Vec<_>>().join("/")
    }
}

#[derive(Clone, Debug)]
pub enum StepOutcome {
    Stepped(Step),
    AlreadyValue(Value),
    Stuck(StuckReason),
}

struct Cx<'a> {
    t: &'a Tables,
    fault: Option<Fault>,
    path: Vec<RuleName>,
    events: Vec<ActivationEvent>,
    active: LayerSeq,
    dispatch: Option<Dispatch>,
}

/// One reduction step of `e` under `seq`.
pub fn step(t: &Tables, seq: &LayerSeq, e: &Expr) -> StepOutcome {
    step_with(t, seq, e, None)
}

pub fn step_with(t: &Tables, seq: &LayerSeq, e: &Expr, fault: Option<Fault>) -> StepOutcome {
    if let Some(v) = e.to_value() {
        return StepOutcome::AlreadyValue(v);
    }
    let mut cx = Cx { t, fault, path: Vec::new(), events: Vec::new(), active: seq.clone(), dispatch: None };
    match cx.reduce(seq, e) {
        Ok(Some(expr)) => StepOutcome::Stepped(Step {
            expr,
            path: cx.path,
            active: cx.active,
            events: cx.events,
            dispatch: cx.dispatch,
        }),
        Ok(None) => unreachable!("non-value expression classified as a value"),
        Err(r) => StepOutcome::Stuck(r),
    }
}

type Reduced = Result<Option<Expr>, StuckReason>;

fn first_non_value(args: &[Expr]) -> Option<usize> {
    args.iter().position(|a| !a.is_value())
}

impl Cx<'_> {
    /// `Ok(None)` when `e` is already a value.
    fn reduce(&mut self, seq: &LayerSeq, e: &Expr) -> Reduced {
        let span = e.span;
        let out = match &e.kind {
            ExprKind::Var(x) => return Err(StuckReason::FreeVariable { name: x.to_string() }),
            ExprKind::NewLayer(_) => return Ok(None),
            ExprKind::New(c, args) => match first_non_value(args) {
                None => return Ok(None),
                Some(i) => {
                    self.path.push(RuleName::RcNew);
                    let a = self.sub(seq, &args[i])?;
                    let mut args = args.clone();
                    args[i] = a;
                    Expr::new_obj(*c, args)
                }
            },
            ExprKind::Field(e0, f) => match e0.to_value() {
                None => {
                    self.path.push(RuleName::RcField);
                    Expr::field(self.sub(seq, e0)?, *f)
                }
                Some(Value::Obj(o)) => {
                    self.path.push(RuleName::RField);
                    self.active = seq.clone();
                    let fs = fields(self.t, o.class).map_err(|_| StuckReason::UnknownClass { class: o.class.to_string() })?;
                    if fs.len() != o.fields.len() {
                        return Err(StuckReason::FieldArity { class: o.class.to_string(), expected: fs.len(), found: o.fields.len() });
                    }
                    let i = fs
                        .iter()
                        .position(|(_, g)| g == f)
                        .ok_or_else(|| StuckReason::NoSuchField { class: o.class.to_string(), field: f.to_string() })?;
                    o.fields[i].to_expr()
                }
                Some(v @ Value::Layer(_)) => return Err(StuckReason::NotAnObject { expr: v.to_string() }),
            },
            ExprKind::Invoke(e0, m, args) => {
                if !e0.is_value() {
                    self.path.push(RuleName::RcInvkRecv);
                    Expr::invoke(self.sub(seq, e0)?, *m, args.clone())
                } else if let Some(i) = first_non_value(args) {
                    self.path.push(RuleName::RcInvkArg);
                    let a = self.sub(seq, &args[i])?;
                    let mut args = args.clone();
                    args[i] = a;
                    Expr::invoke((**e0).clone(), *m, args)
                } else {
                    let recv = match e0.to_value() {
                        Some(Value::Obj(o)) => o,
                        Some(v) => return Err(StuckReason::NotAnObject { expr: v.to_string() }),
                        None => unreachable!(),
                    };
                    self.path.push(RuleName::RInvk);
                    let cursor = Cursor::triple(recv.class, seq.clone(), seq.clone());
                    self.invoke_annotated(seq, &recv, &cursor, *m, args)?
                }
            }
            ExprKind::With(el, body) => match el.to_value() {
                None => {
                    self.path.push(RuleName::RcWithArg);
                    Expr::with(self.sub(seq, el)?, (**body).clone())
                }
                Some(Value::Layer(l)) => {
                    if body.is_value() {
                        self.path.push(RuleName::RWithVal);
                        self.active = seq.clone();
                        (**body).clone()
                    } else {
                        self.path.push(RuleName::RcWith);
                        self.events.push(ActivationEvent::With(l));
                        let inner = with_fn(l, seq);
                        Expr::with((**el).clone(), self.sub(&inner, body)?)
                    }
                }
                Some(v) => return Err(StuckReason::NotALayer { expr: v.to_string() }),
            },
            ExprKind::Swap(el, lsw, body) => match el.to_value() {
                None => {
                    self.path.push(RuleName::RcSwapArg);
                    Expr::swap(self.sub(seq, el)?, *lsw, (**body).clone())
                }
                Some(Value::Layer(l)) => {
                    if body.is_value() {
                        self.path.push(RuleName::RSwapVal);
                        self.active = seq.clone();
                        (**body).clone()
                    } else {
                        self.path.push(RuleName::RcSwap);
                        self.events.push(ActivationEvent::Swap(l, *lsw));
                        let inner = swap_unchecked(self.t, l, *lsw, seq);
                        Expr::swap((**el).clone(), *lsw, self.sub(&inner, body)?)
                    }
                }
                Some(v) => return Err(StuckReason::NotALayer { expr: v.to_string() }),
            },
            ExprKind::Proceed(_) | ExprKind::Super(..) | ExprKind::SuperProceed(_) => {
                return Err(StuckReason::Unresolved { call: e.to_string() })
            }
            ExprKind::InvokeA { recv, cursor, method, args } => match first_non_value(args) {
                Some(i) => {
                    self.path.push(match cursor {
                        Cursor::Triple { .. } => RuleName::RcInvkAArg1,
                        Cursor::Quad { .. } => RuleName::RcInvkAArg2,
                    });
                    let a = self.sub(seq, &args[i])?;
                    let mut args = args.clone();
                    args[i] = a;
                    Expr::invoke_a(recv.clone(), cursor.clone(), *method, args)
                }
                None => self.invoke_annotated(seq, recv, cursor, *method, args)?,
            },
        };
        Ok(Some(out.with_span(span)))
    }

    /// Reduce a subexpression that is known not to be a value.
    fn sub(&mut self, seq: &LayerSeq, e: &Expr) -> Result<Expr, StuckReason> {
        Ok(self.reduce(seq, e)?.expect("subexpression is not a value"))
    }

    /// R-InvkB, R-InvkP or R-InvkSP on `new C(v̄)<cursor>.m(w̄)` with value arguments.
    fn invoke_annotated(
        &mut self,
        seq: &LayerSeq,
        recv: &ObjValue,
        cursor: &Cursor,
        m: MethodName,
        args: &[Expr],
    ) -> Result<Expr, StuckReason> {
        self.active = seq.clone();
        let t = self.t;
        let (rule, site, params, body, bindings) = match cursor {
            Cursor::Triple { class, prefix, full } => {
                let mb = mbody(t, m, *class, prefix, full)
                    .ok_or_else(|| StuckReason::MethodNotFound { method: m.to_string(), cursor: cursor.to_string() })?;
                let found = mb.found_class;
                let d = t.superclass(found).ok_or_else(|| StuckReason::UnknownClass { class: found.to_string() })?;
                let sup = Cursor::triple(d, full.clone(), full.clone());
                match mb.origin {
                    BodyOrigin::Class => {
                        let site = Site { layer: None, class: found, method: m };
                        (RuleName::RInvkB, site, mb.params, mb.body, CursorBindings { proceed: None, sup: Some(sup), superproceed: None })
                    }
                    BodyOrigin::Layer(defining) => {
                        let prefix_found = mb.found_prefix;
                        let up = t.superlayer(defining).unwrap_or_else(LayerName::base);
                        let bindings = CursorBindings {
                            proceed: Some(Cursor::triple(found, prefix_found.init(), full.clone())),
                            sup: Some(sup),
                            superproceed: Some(Cursor::quad(found, up, prefix_found, full.clone())),
                        };
                        let site = Site { layer: Some(defining), class: found, method: m };
                        (RuleName::RInvkP, site, mb.params, mb.body, bindings)
                    }
                }
            }
            Cursor::Quad { class, layer, prefix, full } => {
                if prefix.is_empty() {
                    return Err(StuckReason::EmptySuperproceedPrefix { cursor: cursor.to_string() });
                }
                let pb = pmbody(t, m, *class, *layer).ok_or_else(|| StuckReason::PartialMethodNotFound {
                    method: m.to_string(),
                    class: class.to_string(),
                    layer: layer.to_string(),
                })?;
                let d = t.superclass(*class).ok_or_else(|| StuckReason::UnknownClass { class: class.to_string() })?;
                let up = t.superlayer(pb.found_layer).unwrap_or_else(LayerName::base);
                let bindings = CursorBindings {
                    proceed: Some(Cursor::triple(*class, prefix.init(), full.clone())),
                    sup: Some(Cursor::triple(d, full.clone(), full.clone())),
                    superproceed: Some(Cursor::quad(*class, up, prefix.clone(), full.clone())),
                };
                let site = Site { layer: Some(pb.found_layer), class: *class, method: m };
                (RuleName::RInvkSP, site, pb.params, pb.body, bindings)
            }
        };
        self.path.push(rule);
        if params.len() != args.len() {
            return Err(StuckReason::ArgumentArity { site: site.to_string(), expected: params.len(), found: args.len() });
        }
        let mut spawned = Vec::new();
        let sub = Subst {
            recv,
            params: if self.fault == Some(Fault::SkipArgSubst) { &[] } else { &params },
            args,
            method: m,
            bindings: &bindings,
        };
        let out = sub.apply(body, &mut spawned);
        self.dispatch = Some(Dispatch { rule, receiver: recv.class, method: m, cursor: cursor.clone(), site, spawned });
        Ok(out)
    }
}

/// Cursors substituted for `proceed`, `super` and `superproceed`; `None`
/// leaves the call untouched.
#[derive(Clone, Debug, Default)]
pub struct CursorBindings {
    pub proceed: Option<Cursor>,
    pub sup: Option<Cursor>,
    pub superproceed: Option<Cursor>,
}

struct Subst<'a> {
    recv: &'a ObjValue,
    params: &'a [VarName],
    args: &'a [Expr],
    method: MethodName,
    bindings: &'a CursorBindings,
}

impl Subst<'_> {
    fn apply(&self, e: &Expr, spawned: &mut Vec<(CallKind, Cursor, MethodName)>) -> Expr {
        let mut go = |x: &Expr| self.apply(x, spawned);
        let kind = match &e.kind {
            ExprKind::Var(x) if *x == VarName::this() => return Value::Obj(self.recv.clone()).to_expr().with_span(e.span),
            ExprKind::Var(x) => match self.params.iter().position(|p| p == x) {
                Some(i) => return self.args[i].clone().with_span(e.span),
                None => ExprKind::Var(*x),
            },
            ExprKind::Field(e0, f) => ExprKind::Field(Box::new(go(e0)), *f),
            ExprKind::Invoke(e0, m, args) => {
                let e0 = go(e0);
                ExprKind::Invoke(Box::new(e0), *m, args.iter().map(&mut go).collect())
            }
            ExprKind::New(c, args) => ExprKind::New(*c, args.iter().map(go).collect()),
            ExprKind::NewLayer(l) => ExprKind::NewLayer(*l),
            ExprKind::With(l, b) => {
                let l = go(l);
                ExprKind::With(Box::new(l), Box::new(go(b)))
            }
            ExprKind::Swap(l, lsw, b) => {
                let l = go(l);
                ExprKind::Swap(Box::new(l), *lsw, Box::new(go(b)))
            }
            ExprKind::Proceed(args) => {
                let args: Vec<Expr> = args.iter().map(go).collect();
                match &self.bindings.proceed {
                    Some(c) => {
                        spawned.push((CallKind::Proceed, c.clone(), self.method));
                        ExprKind::InvokeA { recv: self.recv.clone(), cursor: c.clone(), method: self.method, args }
                    }
                    None => ExprKind::Proceed(args),
                }
            }
            ExprKind::Super(m, args) => {
                let args: Vec<Expr> = args.iter().map(go).collect();
                match &self.bindings.sup {
                    Some(c) => {
                        spawned.push((CallKind::Super, c.clone(), *m));
                        ExprKind::InvokeA { recv: self.recv.clone(), cursor: c.clone(), method: *m, args }
                    }
                    None => ExprKind::Super(*m, args),
                }
            }
            ExprKind::SuperProceed(args) => {
                let args: Vec<Expr> = args.iter().map(go).collect();
                match &self.bindings.superproceed {
                    Some(c) => {
                        spawned.push((CallKind::SuperProceed, c.clone(), self.method));
                        ExprKind::InvokeA { recv: self.recv.clone(), cursor: c.clone(), method: self.method, args }
                    }
                    None => ExprKind::SuperProceed(args),
                }
            }
            ExprKind::InvokeA { recv, cursor, method, args } => ExprKind::InvokeA {
                recv: recv.clone(),
                cursor: cursor.clone(),
                method: *method,
                args: args.iter().map(go).collect(),
            },
        };
        Expr { kind, span: e.span }
    }
}

/// Substitute a method body on entry: `this`, parameters, and whichever of
/// `proceed`/`super`/`superproceed` have cursors.
pub fn method_entry_subst(
    body: &Expr,
    receiver: &ObjValue,
    args: &[Value],
    params: &[VarName],
    method: MethodName,
    bindings: &CursorBindings,
) -> Expr {
    assert_eq!(args.len(), params.len(), "argument count must match parameter count");
    let args: Vec<Expr> = args.iter().map(Value::to_expr).collect();
    Subst { recv: receiver, params, args: &args, method, bindings }.apply(body, &mut Vec::new())
}

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub index: usize,
    pub active: LayerSeq,
    pub path: Vec<RuleName>,
    pub events: Vec<ActivationEvent>,
    pub dispatch: Option<Dispatch>,
    pub expr: Expr,
}

impl TraceEntry {
    pub fn rule(&self) -> RuleName {
        self.path[0]
    }

    pub fn path_string(&self) -> String {
        self.path.iter().map(|r| r.as_str()).collect::<Vec<_>>().join("/")
    }
}

fn seq_brackets(seq: &LayerSeq) -> String {
    let names: Vec<&str> = seq.iter().map(|l| l.as_str()).collect();
    format!("[{}]", names.join(";"))
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{} {} {} {}", self.index, seq_brackets(&self.active), self.path_string(), self.expr)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub initial: Option<Expr>,
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    /// One line per step.
    pub fn render(&self) -> String {
        self.entries.iter().map(|e| format!("{e}\n")).collect()
    }

    /// One line per method entry: `#k RULE C.m <cursor> => site`.
    pub fn render_dispatches(&self) -> String {
        self.entries
            .iter()
            .filter_map(|e| e.dispatch.as_ref().map(|d| format!("#{} {d}\n", e.index)))
            .collect()
    }

    pub fn dispatches(&self) -> impl Iterator<Item = (usize, &Dispatch)> {
        self.entries.iter().filter_map(|e| e.dispatch.as_ref().map(|d| (e.index, d)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(Value),
    Stuck { reason: StuckReason, expr: Expr, active: LayerSeq },
    OutOfFuel,
}

/// Drive [`step`] from the empty sequence until a value, a stuck state, or
/// `max_steps` steps.
pub fn eval(t: &Tables, e: &Expr, max_steps: usize) -> (Outcome, Trace) {
    eval_with(t, e, EvalConfig { max_steps, fault: None })
}

pub fn eval_with(t: &Tables, e: &Expr, cfg: EvalConfig) -> (Outcome, Trace) {
    let mut trace = Trace { initial: Some(e.clone()), entries: Vec::new() };
    let top = LayerSeq::empty();
    let mut cur = e.clone();
    loop {
        match step_with(t, &top, &cur, cfg.fault) {
            StepOutcome::AlreadyValue(v) => return (Outcome::Value(v), trace),
            StepOutcome::Stuck(reason) => {
                let active = stuck_active(t, &cur);
                return (Outcome::Stuck { reason, expr: cur, active }, trace);
            }
            StepOutcome::Stepped(s) => {
                if trace.entries.len() >= cfg.max_steps {
                    return (Outcome::OutOfFuel, trace);
                }
                trace.entries.push(TraceEntry {
                    index: trace.entries.len() + 1,
                    active: s.active,
                    path: s.path,
                    events: s.events,
                    dispatch: s.dispatch,
                    expr: s.expr.clone(),
                });
                cur = s.expr;
            }
        }
    }
}

/// Active sequence at the point where reduction would continue, following
/// the same descent order as [`step`].
fn stuck_active(t: &Tables, e: &Expr) -> LayerSeq {
    let mut seq = LayerSeq::empty();
    let mut cur = e;
    loop {
        match &cur.kind {
            ExprKind::With(el, _) if !el.is_value() => cur = el,
            ExprKind::With(el, body) => match el.to_value() {
                Some(Value::Layer(l)) if !body.is_value() => {
                    seq = with_fn(l, &seq);
                    cur = body;
                }
                _ => return seq,
            },
            ExprKind::Swap(el, lsw, body) => match el.to_value() {
                None => cur = el,
                Some(Value::Layer(l)) if !body.is_value() => {
                    seq = swap_unchecked(t, l, *lsw, &seq);
                    cur = body;
                }
                _ => return seq,
            },
            ExprKind::Field(e0, _) if !e0.is_value() => cur = e0,
            ExprKind::Invoke(e0, _, args) => match (e0.is_value(), first_non_value(args)) {
                (false, _) => cur = e0,
                (true, Some(i)) => cur = &args[i],
                _ => return seq,
            },
            ExprKind::New(_, args) | ExprKind::InvokeA { args, .. } => match first_non_value(args) {
                Some(i) => cur = &args[i],
                None => return seq,
            },
            _ => return seq,
        }
    }
}
