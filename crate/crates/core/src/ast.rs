//! Abstract syntax: names, types, declarations, expressions, values,
//! cursors and the class/layer tables.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use indexmap::IndexMap;
use serde::Serialize;

use crate::intern::Symbol;

macro_rules! name_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Symbol);

        impl $name {
            pub fn new(s: &str) -> Self {
                $name(Symbol::intern(s))
            }
            pub fn as_str(self) -> &'static str {
                self.0.as_str()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }
    };
}

name_type!(ClassName);
name_type!(LayerName);
name_type!(MethodName);
name_type!(FieldName);
name_type!(VarName);

impl ClassName {
    pub fn object() -> ClassName {
        ClassName::new("Object")
    }
    pub fn is_object(self) -> bool {
        self == ClassName::object()
    }
}

impl LayerName {
    pub fn base() -> LayerName {
        LayerName::new("Base")
    }
    pub fn is_base(self) -> bool {
        self == LayerName::base()
    }
}

impl VarName {
    pub fn this() -> VarName {
        VarName::new("this")
    }
}

/// Byte range plus 1-based line/column of the start position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { start: self.start, end: other.end.max(self.end), line: self.line, col: self.col }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Class(ClassName),
    Layer(LayerName),
}

impl Serialize for Type {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Class(c) => write!(f, "{c}"),
            Type::Layer(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub ty: Type,
    pub name: VarName,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDecl {
    pub ty: Type,
    pub name: FieldName,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct MethodDecl {
    pub name: MethodName,
    pub ret: Type,
    pub params: Vec<Param>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct PartialMethodDecl {
    pub class: ClassName,
    pub name: MethodName,
    pub ret: Type,
    pub params: Vec<Param>,
    pub body: Expr,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct ClassDecl {
    pub name: ClassName,
    pub superclass: ClassName,
    pub fields: Vec<FieldDecl>,
    pub methods: IndexMap<MethodName, MethodDecl>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct LayerDecl {
    pub name: LayerName,
    pub superlayer: LayerName,
    pub swappable: bool,
    pub requires: LayerSet,
    pub partial_methods: IndexMap<(ClassName, MethodName), PartialMethodDecl>,
    pub span: Span,
}

/// Ordered, duplicate-free activation sequence; the last element is the
/// most recently activated layer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayerSeq(Vec<LayerName>);

impl LayerSeq {
    pub fn empty() -> LayerSeq {
        LayerSeq(Vec::new())
    }

    /// Panics on duplicates: every sequence the calculus manipulates is
    /// duplicate-free, so a duplicate is a bug at the call site.
    pub fn from_vec(v: Vec<LayerName>) -> LayerSeq {
        let seq = LayerSeq(v);
        assert!(seq.is_duplicate_free(), "layer sequence with duplicates: {seq}");
        seq
    }

    pub fn try_from_vec(v: Vec<LayerName>) -> Option<LayerSeq> {
        let seq = LayerSeq(v);
        seq.is_duplicate_free().then_some(seq)
    }

    pub fn is_duplicate_free(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.iter().all(|l| seen.insert(*l))
    }

    pub fn as_slice(&self) -> &[LayerName] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn last(&self) -> Option<LayerName> {
        self.0.last().copied()
    }
    pub fn contains(&self, l: LayerName) -> bool {
        self.0.contains(&l)
    }
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = LayerName> + '_ {
        self.0.iter().copied()
    }
    pub fn is_prefix_of(&self, other: &LayerSeq) -> bool {
        other.0.starts_with(&self.0)
    }
    /// The first `n` layers.
    pub fn prefix(&self, n: usize) -> LayerSeq {
        LayerSeq(self.0[..n].to_vec())
    }
    /// Sequence without its last element (identity on the empty sequence).
    pub fn init(&self) -> LayerSeq {
        let n = self.0.len().saturating_sub(1);
        self.prefix(n)
    }
    pub fn to_set(&self) -> LayerSet {
        self.0.iter().copied().collect()
    }
    pub(crate) fn retain(&mut self, f: impl FnMut(&LayerName) -> bool) {
        self.0.retain(f)
    }
    pub(crate) fn push_unique(&mut self, l: LayerName) {
        assert!(!self.0.contains(&l));
        self.0.push(l)
    }
}

impl fmt::Display for LayerSeq {
    /// `•` for the empty sequence, `(L1;L2)` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("•");
        }
        f.write_str("(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// The static layer-set approximation Λ.
pub type LayerSet = BTreeSet<LayerName>;

pub fn fmt_layer_set(set: &LayerSet) -> String {
    let names: Vec<&str> = set.iter().map(|l| l.as_str()).collect();
    format!("{{{}}}", names.join(", "))
}

/// Lookup cursor carried by a runtime invocation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cursor {
    Triple { class: ClassName, prefix: LayerSeq, full: LayerSeq },
    Quad { class: ClassName, layer: LayerName, prefix: LayerSeq, full: LayerSeq },
}

impl Cursor {
    pub fn triple(class: ClassName, prefix: LayerSeq, full: LayerSeq) -> Cursor {
        assert!(prefix.is_prefix_of(&full), "cursor prefix {prefix} is not a prefix of {full}");
        Cursor::Triple { class, prefix, full }
    }

    pub fn quad(class: ClassName, layer: LayerName, prefix: LayerSeq, full: LayerSeq) -> Cursor {
        assert!(prefix.is_prefix_of(&full), "cursor prefix {prefix} is not a prefix of {full}");
        Cursor::Quad { class, layer, prefix, full }
    }

    pub fn class(&self) -> ClassName {
        match self {
            Cursor::Triple { class, .. } | Cursor::Quad { class, .. } => *class,
        }
    }
    pub fn prefix(&self) -> &LayerSeq {
        match self {
            Cursor::Triple { prefix, .. } | Cursor::Quad { prefix, .. } => prefix,
        }
    }
    pub fn full(&self) -> &LayerSeq {
        match self {
            Cursor::Triple { full, .. } | Cursor::Quad { full, .. } => full,
        }
    }
}

impl fmt::Display for Cursor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cursor::Triple { class, prefix, full } => write!(f, "<{class},{prefix},{full}>"),
            Cursor::Quad { class, layer, prefix, full } => {
                write!(f, "<{class},{layer},{prefix},{full}>")
            }
        }
    }
}

/// A fully evaluated object `new C(v̄)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ObjValue {
    pub class: ClassName,
    pub fields: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Obj(ObjValue),
    Layer(LayerName),
}

impl Value {
    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Obj(o) => Expr::new_obj(o.class, o.fields.iter().map(Value::to_expr).collect()),
            Value::Layer(l) => Expr::new_layer(*l),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Structural equality; spans are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Var(VarName),
    Field(Box<Expr>, FieldName),
    Invoke(Box<Expr>, MethodName, Vec<Expr>),
    New(ClassName, Vec<Expr>),
    NewLayer(LayerName),
    With(Box<Expr>, Box<Expr>),
    Swap(Box<Expr>, LayerName, Box<Expr>),
    Proceed(Vec<Expr>),
    Super(MethodName, Vec<Expr>),
    SuperProceed(Vec<Expr>),
    /// Runtime-only `new C(v̄)<cursor>.m(ē)`.
    InvokeA { recv: ObjValue, cursor: Cursor, method: MethodName, args: Vec<Expr> },
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Expr {
        Expr { kind, span: Span::default() }
    }
}

impl Expr {
    pub fn var(x: impl Into<VarName>) -> Expr {
        ExprKind::Var(x.into()).into()
    }
    pub fn this() -> Expr {
        Expr::var(VarName::this())
    }
    pub fn field(e: Expr, f: impl Into<FieldName>) -> Expr {
        ExprKind::Field(Box::new(e), f.into()).into()
    }
    pub fn invoke(e: Expr, m: impl Into<MethodName>, args: Vec<Expr>) -> Expr {
        ExprKind::Invoke(Box::new(e), m.into(), args).into()
    }
    pub fn new_obj(c: impl Into<ClassName>, args: Vec<Expr>) -> Expr {
        ExprKind::New(c.into(), args).into()
    }
    pub fn new_layer(l: impl Into<LayerName>) -> Expr {
        ExprKind::NewLayer(l.into()).into()
    }
    pub fn with(layer: Expr, body: Expr) -> Expr {
        ExprKind::With(Box::new(layer), Box::new(body)).into()
    }
    pub fn swap(layer: Expr, lsw: impl Into<LayerName>, body: Expr) -> Expr {
        ExprKind::Swap(Box::new(layer), lsw.into(), Box::new(body)).into()
    }
    pub fn proceed(args: Vec<Expr>) -> Expr {
        ExprKind::Proceed(args).into()
    }
    pub fn super_call(m: impl Into<MethodName>, args: Vec<Expr>) -> Expr {
        ExprKind::Super(m.into(), args).into()
    }
    pub fn super_proceed(args: Vec<Expr>) -> Expr {
        ExprKind::SuperProceed(args).into()
    }
    pub fn invoke_a(recv: ObjValue, cursor: Cursor, m: impl Into<MethodName>, args: Vec<Expr>) -> Expr {
        ExprKind::InvokeA { recv, cursor, method: m.into(), args }.into()
    }

    pub fn with_span(mut self, span: Span) -> Expr {
        self.span = span;
        self
    }

    pub fn is_value(&self) -> bool {
        match &self.kind {
            ExprKind::New(_, args) => args.iter().all(Expr::is_value),
            ExprKind::NewLayer(_) => true,
            _ => false,
        }
    }

    pub fn to_value(&self) -> Option<Value> {
        match &self.kind {
            ExprKind::New(c, args) => {
                let fields = args.iter().map(Expr::to_value).collect::<Option<Vec<_>>>()?;
                Some(Value::Obj(ObjValue { class: *c, fields }))
            }
            ExprKind::NewLayer(l) => Some(Value::Layer(*l)),
            _ => None,
        }
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Var(_) | ExprKind::NewLayer(_) => {}
            ExprKind::Field(e, _) => e.walk(f),
            ExprKind::Invoke(e, _, args) => {
                e.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ExprKind::New(_, args)
            | ExprKind::Proceed(args)
            | ExprKind::Super(_, args)
            | ExprKind::SuperProceed(args) => args.iter().for_each(|a| a.walk(f)),
            ExprKind::With(l, b) | ExprKind::Swap(l, _, b) => {
                l.walk(f);
                b.walk(f);
            }
            ExprKind::InvokeA { args, .. } => args.iter().for_each(|a| a.walk(f)),
        }
    }

    pub fn any(&self, pred: impl Fn(&ExprKind) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= pred(&e.kind));
        found
    }

    /// Number of nodes, used by the enumerator and tests.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

/// The typing context ℒ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    TopLevel,
    Method(ClassName, MethodName),
    PartialMethod(LayerName, ClassName, MethodName),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::TopLevel => f.write_str("main"),
            Location::Method(c, m) => write!(f, "{c}.{m}"),
            Location::PartialMethod(l, c, m) => write!(f, "{l}.{c}.{m}"),
        }
    }
}

/// Γ: variable typings. `this` is bound exactly when the location is a method.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TypeEnv(IndexMap<VarName, Type>);

impl TypeEnv {
    pub fn empty() -> TypeEnv {
        TypeEnv::default()
    }
    pub fn for_method(this: ClassName, params: &[Param]) -> TypeEnv {
        let mut env = IndexMap::new();
        env.insert(VarName::this(), Type::Class(this));
        for p in params {
            env.insert(p.name, p.ty);
        }
        TypeEnv(env)
    }
    pub fn get(&self, x: VarName) -> Option<Type> {
        self.0.get(&x).copied()
    }
    pub fn insert(&mut self, x: VarName, t: Type) {
        self.0.insert(x, t);
    }
}

pub(crate) type FieldsResult = Result<Vec<(Type, FieldName)>, crate::lookup::LookupError>;

/// Memoized facts derived from immutable tables.
#[derive(Default)]
pub(crate) struct Cache {
    pub(crate) class_chains: OnceLock<HashMap<ClassName, Vec<ClassName>>>,
    pub(crate) layer_chains: OnceLock<HashMap<LayerName, Vec<LayerName>>>,
    pub(crate) fields: OnceLock<HashMap<ClassName, FieldsResult>>,
    pub(crate) mtype: RwLock<HashMap<crate::lookup::MTypeKey, crate::lookup::MType>>,
    pub(crate) wf: OnceLock<crate::typing::wf::WfCache>,
}

/// Class table and layer table. Immutable once built; share via `Arc`.
pub struct Tables {
    pub classes: IndexMap<ClassName, ClassDecl>,
    pub layers: IndexMap<LayerName, LayerDecl>,
    pub(crate) cache: Cache,
}

impl Clone for Tables {
    fn clone(&self) -> Tables {
        Tables::new(self.classes.clone(), self.layers.clone())
    }
}

impl fmt::Debug for Tables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tables")
            .field("classes", &self.classes.keys().collect::<Vec<_>>())
            .field("layers", &self.layers.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Tables {
    pub fn new(
        classes: IndexMap<ClassName, ClassDecl>,
        layers: IndexMap<LayerName, LayerDecl>,
    ) -> Tables {
        Tables { classes, layers, cache: Cache::default() }
    }

    pub fn empty() -> Tables {
        Tables::new(IndexMap::new(), IndexMap::new())
    }

    pub fn class(&self, c: ClassName) -> Option<&ClassDecl> {
        self.classes.get(&c)
    }

    pub fn layer(&self, l: LayerName) -> Option<&LayerDecl> {
        self.layers.get(&l)
    }

    /// Requires set of a layer; `Base` and unknown layers require nothing.
    pub fn requires(&self, l: LayerName) -> LayerSet {
        self.layers.get(&l).map(|d| d.requires.clone()).unwrap_or_default()
    }

    pub fn is_swappable(&self, l: LayerName) -> bool {
        self.layers.get(&l).is_some_and(|d| d.swappable)
    }

    pub fn superclass(&self, c: ClassName) -> Option<ClassName> {
        self.classes.get(&c).map(|d| d.superclass)
    }

    pub fn superlayer(&self, l: LayerName) -> Option<LayerName> {
        self.layers.get(&l).map(|d| d.superlayer)
    }

    pub fn layer_names(&self) -> Vec<LayerName> {
        self.layers.keys().copied().collect()
    }

    pub fn class_names(&self) -> Vec<ClassName> {
        self.classes.keys().copied().collect()
    }

    pub fn is_class_name(&self, c: ClassName) -> bool {
        c.is_object() || self.classes.contains_key(&c)
    }

    pub fn is_layer_name(&self, l: LayerName) -> bool {
        l.is_base() || self.layers.contains_key(&l)
    }
}

/// A whole program `(CT, LT, e)`.
#[derive(Clone, Debug)]
pub struct Program {
    pub tables: Arc<Tables>,
    pub main: Expr,
}

impl Program {
    pub fn new(tables: Tables, main: Expr) -> Program {
        Program { tables: Arc::new(tables), main }
    }

    pub fn with_main(&self, main: Expr) -> Program {
        Program { tables: Arc::clone(&self.tables), main }
    }
}

impl std::ops::Deref for Program {
    type Target = Tables;
    fn deref(&self) -> &Tables {
        &self.tables
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(names: &[&str]) -> LayerSeq {
        LayerSeq::from_vec(names.iter().map(|n| LayerName::new(n)).collect())
    }

    #[test]
    fn seq_rendering() {
        assert_eq!(LayerSeq::empty().to_string(), "•");
        assert_eq!(seq(&["L1", "L2"]).to_string(), "(L1;L2)");
    }

    #[test]
    #[should_panic]
    fn seq_rejects_duplicates() {
        seq(&["L1", "L1"]);
    }

    #[test]
    #[should_panic]
    fn cursor_asserts_prefix() {
        Cursor::triple(ClassName::new("C"), seq(&["L2"]), seq(&["L1", "L2"]));
    }

    #[test]
    fn prefix_helpers() {
        let s = seq(&["L1", "L2", "L3"]);
        assert!(seq(&["L1", "L2"]).is_prefix_of(&s));
        assert!(LayerSeq::empty().is_prefix_of(&s));
        assert!(!seq(&["L2"]).is_prefix_of(&s));
        assert_eq!(s.init(), seq(&["L1", "L2"]));
        assert_eq!(LayerSeq::empty().init(), LayerSeq::empty());
    }

    #[test]
    fn values_roundtrip_through_exprs() {
        let v = Value::Obj(ObjValue {
            class: ClassName::new("Two"),
            fields: vec![
                Value::Obj(ObjValue { class: ClassName::new("U"), fields: vec![] }),
                Value::Layer(LayerName::new("L1")),
            ],
        });
        assert_eq!(v.to_expr().to_value(), Some(v.clone()));
        assert!(v.to_expr().is_value());
        assert!(!Expr::invoke(v.to_expr(), "m", vec![]).is_value());
    }

    #[test]
    fn equality_ignores_spans() {
        let a = Expr::this().with_span(Span { start: 3, end: 7, line: 1, col: 4 });
        assert_eq!(a, Expr::this());
    }
}
