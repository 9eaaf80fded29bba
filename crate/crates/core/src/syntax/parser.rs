use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use super::lexer::{lex, Tok, Token};
use crate::ast::*;
use crate::validate::{validate_tables, ValidationReport};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.span.line, self.span.col)?;
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}, found {}", many.join(", "), self.found),
        }
    }
}

#[derive(Clone, Debug, Error)]
pub enum LoadError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Validation(ValidationReport),
}

/// Where an expression is being parsed; decides which call forms are legal.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Main,
    Method,
    PartialMethod,
    Runtime,
}

/// Expressions nested deeper than this are rejected rather than risking
/// the stack in the recursive parser and the passes that follow it.
pub const MAX_NESTING: usize = 200;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    nesting: usize,
    classes: HashSet<String>,
    layers: HashSet<String>,
    dups: ValidationReport,
}

/// Parse and validate a program.
pub fn parse_program(src: &str) -> Result<Program, LoadError> {
    let (program, mut report) = parse_with_report(src)?;
    report.merge(validate_tables(&program));
    if report.is_ok() {
        Ok(program)
    } else {
        Err(LoadError::Validation(report))
    }
}

/// Parse without running the sanity checks. Duplicate declarations are
/// silently collapsed (the last one wins); use [`parse_program`] to see them.
pub fn parse_unvalidated(src: &str) -> Result<Program, ParseError> {
    parse_with_report(src).map(|(p, _)| p)
}

fn parse_with_report(src: &str) -> Result<(Program, ValidationReport), ParseError> {
    let mut p = Parser::new(src)?;
    p.prescan();
    let program = p.program()?;
    Ok((program, p.dups))
}

/// Parse an expression that may contain runtime invocation forms
/// (`new C()<C,(L1;L2),(L1;L2)>.m()`), resolving names against `tables`.
pub fn parse_runtime_expr(tables: &Tables, src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    p.classes = tables.classes.keys().map(|c| c.as_str().to_owned()).collect();
    p.layers = tables.layers.keys().map(|l| l.as_str().to_owned()).collect();
    let e = p.expr(Ctx::Runtime)?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        let toks = lex(src).map_err(|e| ParseError {
            span: e.span,
            expected: vec![],
            found: format!("character `{}`", e.found),
        })?;
        Ok(Parser { toks, pos: 0, nesting: 0, classes: HashSet::new(), layers: HashSet::new(), dups: ValidationReport::default() })
    }

    /// Collect declared class and layer names so `ID` tokens in type and
    /// `new` positions can be resolved before the declaration is reached.
    fn prescan(&mut self) {
        for w in self.toks.windows(2) {
            if let Tok::Ident(name) = &w[1].tok {
                match w[0].tok {
                    Tok::Class => {
                        self.classes.insert(name.clone());
                    }
                    Tok::Layer => {
                        self.layers.insert(name.clone());
                    }
                    _ => {}
                }
            }
        }
    }

    fn is_layer(&self, name: &str) -> bool {
        name == "Base" || (self.layers.contains(name) && !self.classes.contains(name))
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn eat(&mut self, t: Tok) -> bool {
        if *self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<Span, ParseError> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            Err(self.error(&[&t.to_string()]))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let (name, _) = self.ident()?;
        Ok(if self.is_layer(&name) { Type::Layer(LayerName::new(&name)) } else { Type::Class(ClassName::new(&name)) })
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut classes: IndexMap<ClassName, ClassDecl> = IndexMap::new();
        let mut layers: IndexMap<LayerName, LayerDecl> = IndexMap::new();
        loop {
            match self.peek() {
                Tok::Class => {
                    let c = self.class_decl()?;
                    if classes.contains_key(&c.name) {
                        self.dups.push(Some(1), c.name, c.span, format!("class {} declared twice", c.name));
                    }
                    classes.insert(c.name, c);
                }
                Tok::Layer | Tok::Swappable => {
                    let l = self.layer_decl()?;
                    if layers.contains_key(&l.name) {
                        self.dups.push(Some(4), l.name, l.span, format!("layer {} declared twice", l.name));
                    }
                    layers.insert(l.name, l);
                }
                Tok::Main => break,
                _ => return Err(self.error(&["`class`", "`layer`", "`swappable`", "`main`"])),
            }
        }
        self.expect(Tok::Main)?;
        self.expect(Tok::LBrace)?;
        let main = self.expr(Ctx::Main)?;
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Eof)?;
        Ok(Program::new(Tables::new(classes, layers), main))
    }

    fn class_decl(&mut self) -> Result<ClassDecl, ParseError> {
        let start = self.expect(Tok::Class)?;
        let (name, _) = self.ident()?;
        let name = ClassName::new(&name);
        let superclass = if self.eat(Tok::Extends) { ClassName::new(&self.ident()?.0) } else { ClassName::object() };
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        let mut methods: IndexMap<MethodName, MethodDecl> = IndexMap::new();
        while *self.peek() != Tok::RBrace {
            let member_span = self.span();
            let ty = self.ty()?;
            let (mname, _) = self.ident()?;
            match self.peek() {
                Tok::Semi if methods.is_empty() => {
                    self.bump();
                    fields.push(FieldDecl { ty, name: FieldName::new(&mname), span: member_span });
                }
                Tok::LParen => {
                    let m = MethodName::new(&mname);
                    let params = self.params()?;
                    let body = self.method_body(Ctx::Method)?;
                    let span = member_span.to(self.prev_span());
                    if methods.contains_key(&m) {
                        self.dups.push(None, name, span, format!("method {m} declared twice"));
                    }
                    methods.insert(m, MethodDecl { name: m, ret: ty, params, body, span });
                }
                _ if methods.is_empty() => return Err(self.error(&["`;`", "`(`"])),
                _ => return Err(self.error(&["`(`"])),
            }
        }
        let end = self.expect(Tok::RBrace)?;
        Ok(ClassDecl { name, superclass, fields, methods, span: start.to(end) })
    }

    fn layer_decl(&mut self) -> Result<LayerDecl, ParseError> {
        let start = self.span();
        let swappable = self.eat(Tok::Swappable);
        self.expect(Tok::Layer)?;
        let (name, _) = self.ident()?;
        let name = LayerName::new(&name);
        let superlayer = if self.eat(Tok::Extends) { LayerName::new(&self.ident()?.0) } else { LayerName::base() };
        let mut requires = LayerSet::new();
        if self.eat(Tok::Requires) {
            loop {
                let (r, span) = self.ident()?;
                if !requires.insert(LayerName::new(&r)) {
                    self.dups.push(None, name, span, format!("layer {r} required twice"));
                }
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::LBrace)?;
        let mut pms: IndexMap<(ClassName, MethodName), PartialMethodDecl> = IndexMap::new();
        while *self.peek() != Tok::RBrace {
            let pm_start = self.span();
            let ret = self.ty()?;
            let (class, _) = self.ident()?;
            self.expect(Tok::Dot)?;
            let (m, _) = self.ident()?;
            let (class, m) = (ClassName::new(&class), MethodName::new(&m));
            let params = self.params()?;
            let body = self.method_body(Ctx::PartialMethod)?;
            let span = pm_start.to(self.prev_span());
            if pms.contains_key(&(class, m)) {
                self.dups.push(None, name, span, format!("partial method {class}.{m} declared twice"));
            }
            pms.insert((class, m), PartialMethodDecl { class, name: m, ret, params, body, span });
        }
        let end = self.expect(Tok::RBrace)?;
        Ok(LayerDecl { name, superlayer, swappable, requires, partial_methods: pms, span: start.to(end) })
    }

    fn params(&mut self) -> Result<Vec<Param>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.eat(Tok::RParen) {
            return Ok(params);
        }
        loop {
            let ty = self.ty()?;
            let name = match self.peek() {
                Tok::This => {
                    self.bump();
                    VarName::this()
                }
                _ => VarName::new(&self.ident()?.0),
            };
            params.push(Param { ty, name });
            if self.eat(Tok::RParen) {
                return Ok(params);
            }
            if !self.eat(Tok::Comma) {
                return Err(self.error(&["`,`", "`)`"]));
            }
        }
    }

    fn method_body(&mut self, ctx: Ctx) -> Result<Expr, ParseError> {
        self.expect(Tok::LBrace)?;
        self.expect(Tok::Return)?;
        let e = self.expr(ctx)?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        Ok(e)
    }

    fn args(&mut self, ctx: Ctx) -> Result<Vec<Expr>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.eat(Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr(ctx)?);
            if self.eat(Tok::RParen) {
                return Ok(args);
            }
            if !self.eat(Tok::Comma) {
                return Err(self.error(&["`,`", "`)`"]));
            }
        }
    }

    fn expr(&mut self, ctx: Ctx) -> Result<Expr, ParseError> {
        if self.nesting >= MAX_NESTING {
            return Err(ParseError {
                span: self.span(),
                expected: vec![],
                found: format!("expression nested more than {MAX_NESTING} deep"),
            });
        }
        self.nesting += 1;
        let e = self.expr_inner(ctx);
        self.nesting -= 1;
        e
    }

    fn expr_inner(&mut self, ctx: Ctx) -> Result<Expr, ParseError> {
        let start = self.span();
        let mut e = self.primary(ctx)?;
        let mut links = 0;
        while self.eat(Tok::Dot) {
            links += 1;
            if self.nesting + links > MAX_NESTING {
                return Err(ParseError {
                    span: self.prev_span(),
                    expected: vec![],
                    found: format!("call chain nested more than {MAX_NESTING} deep"),
                });
            }
            let (name, _) = self.ident()?;
            if *self.peek() == Tok::LParen {
                let args = self.args(ctx)?;
                e = Expr::invoke(e, MethodName::new(&name), args);
            } else {
                e = Expr::field(e, FieldName::new(&name));
            }
            e.span = start.to(self.prev_span());
        }
        Ok(e)
    }

    fn primary(&mut self, ctx: Ctx) -> Result<Expr, ParseError> {
        let start = self.span();
        let e = match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Expr::var(VarName::new(&x))
            }
            Tok::This => {
                self.bump();
                Expr::this()
            }
            Tok::New => {
                self.bump();
                let (name, _) = self.ident()?;
                let args = self.args(ctx)?;
                if self.is_layer(&name) {
                    if !args.is_empty() {
                        return Err(ParseError {
                            span: start,
                            expected: vec!["`new L()` without arguments".into()],
                            found: format!("{} argument(s)", args.len()),
                        });
                    }
                    Expr::new_layer(LayerName::new(&name))
                } else if ctx == Ctx::Runtime && *self.peek() == Tok::Lt {
                    let recv = Expr::new_obj(ClassName::new(&name), args);
                    return self.annotated(recv, start);
                } else {
                    Expr::new_obj(ClassName::new(&name), args)
                }
            }
            Tok::Proceed | Tok::SuperProceed => {
                let is_proceed = *self.peek() == Tok::Proceed;
                if ctx != Ctx::PartialMethod {
                    return Err(ParseError {
                        span: start,
                        expected: vec![],
                        found: format!("{} outside a partial method", self.peek()),
                    });
                }
                self.bump();
                let args = self.args(ctx)?;
                if is_proceed {
                    Expr::proceed(args)
                } else {
                    Expr::super_proceed(args)
                }
            }
            Tok::Super => {
                self.bump();
                self.expect(Tok::Dot)?;
                let (m, _) = self.ident()?;
                let args = self.args(ctx)?;
                Expr::super_call(MethodName::new(&m), args)
            }
            Tok::With => {
                self.bump();
                let layer = self.expr(ctx)?;
                self.expect(Tok::LBrace)?;
                let body = self.expr(ctx)?;
                self.expect(Tok::RBrace)?;
                Expr::with(layer, body)
            }
            Tok::Swap => {
                self.bump();
                self.expect(Tok::LParen)?;
                let layer = self.expr(ctx)?;
                self.expect(Tok::Comma)?;
                let (lsw, _) = self.ident()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::LBrace)?;
                let body = self.expr(ctx)?;
                self.expect(Tok::RBrace)?;
                Expr::swap(layer, LayerName::new(&lsw), body)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(ctx)?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            _ => {
                return Err(self.error(&[
                    "identifier", "`this`", "`new`", "`proceed`", "`superproceed`", "`super`", "`with`", "`swap`", "`(`",
                ]))
            }
        };
        Ok(e.with_span(start.to(self.prev_span())))
    }

    /// `<C,[L,]seq,seq>.m(args)` after a receiver `new C(v̄)`.
    fn annotated(&mut self, recv: Expr, start: Span) -> Result<Expr, ParseError> {
        let recv_span = self.span();
        let Some(Value::Obj(recv)) = recv.to_value() else {
            return Err(ParseError {
                span: recv_span,
                expected: vec!["a fully evaluated receiver".into()],
                found: "a non-value receiver".into(),
            });
        };
        self.expect(Tok::Lt)?;
        let (class, _) = self.ident()?;
        let class = ClassName::new(&class);
        self.expect(Tok::Comma)?;
        let layer = match self.peek().clone() {
            Tok::Ident(l) => {
                self.bump();
                self.expect(Tok::Comma)?;
                Some(LayerName::new(&l))
            }
            _ => None,
        };
        let prefix = self.layer_seq()?;
        self.expect(Tok::Comma)?;
        let full = self.layer_seq()?;
        let gt = self.span();
        self.expect(Tok::Gt)?;
        if !prefix.is_prefix_of(&full) {
            return Err(ParseError {
                span: gt,
                expected: vec!["a cursor whose prefix is a prefix of its sequence".into()],
                found: format!("{prefix} and {full}"),
            });
        }
        self.expect(Tok::Dot)?;
        let (m, _) = self.ident()?;
        let args = self.args(Ctx::Runtime)?;
        let cursor = match layer {
            None => Cursor::triple(class, prefix, full),
            Some(l) => Cursor::quad(class, l, prefix, full),
        };
        Ok(Expr::invoke_a(recv, cursor, MethodName::new(&m), args).with_span(start.to(self.prev_span())))
    }

    fn layer_seq(&mut self) -> Result<LayerSeq, ParseError> {
        if self.eat(Tok::Bullet) {
            return Ok(LayerSeq::empty());
        }
        let open = self.span();
        if !self.eat(Tok::LParen) {
            return Err(self.error(&["`•`", "`(`"]));
        }
        let mut names = Vec::new();
        loop {
            names.push(LayerName::new(&self.ident()?.0));
            if self.eat(Tok::RParen) {
                break;
            }
            if !self.eat(Tok::Semi) {
                return Err(self.error(&["`;`", "`)`"]));
            }
        }
        LayerSeq::try_from_vec(names).ok_or(ParseError {
            span: open,
            expected: vec!["a duplicate-free layer sequence".into()],
            found: "a repeated layer".into(),
        })
    }
}

