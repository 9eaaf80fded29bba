//! Pretty-printer. Output re-parses to the same AST (modulo spans); runtime
//! invocations re-parse through [`super::parse_runtime_expr`].

use std::fmt::{self, Write};

use crate::ast::*;

pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    for c in p.classes.values() {
        render_class(&mut out, c);
    }
    for l in p.layers.values() {
        render_layer(&mut out, l);
    }
    let _ = writeln!(out, "main {{ {} }}", render_expr(&p.main));
    out
}

fn render_params(params: &[Param]) -> String {
    params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect::<Vec<_>>().join(", ")
}

fn render_class(out: &mut String, c: &ClassDecl) {
    let _ = writeln!(out, "class {} extends {} {{", c.name, c.superclass);
    for f in &c.fields {
        let _ = writeln!(out, "    {} {};", f.ty, f.name);
    }
    for m in c.methods.values() {
        let _ = writeln!(
            out,
            "    {} {}({}) {{ return {}; }}",
            m.ret,
            m.name,
            render_params(&m.params),
            render_expr(&m.body)
        );
    }
    out.push_str("}\n");
}

fn render_layer(out: &mut String, l: &LayerDecl) {
    if l.swappable {
        out.push_str("swappable ");
    }
    let _ = write!(out, "layer {}", l.name);
    if !l.superlayer.is_base() {
        let _ = write!(out, " extends {}", l.superlayer);
    }
    if !l.requires.is_empty() {
        let names: Vec<&str> = l.requires.iter().map(|r| r.as_str()).collect();
        let _ = write!(out, " requires {}", names.join(", "));
    }
    out.push_str(" {\n");
    for pm in l.partial_methods.values() {
        let _ = writeln!(
            out,
            "    {} {}.{}({}) {{ return {}; }}",
            pm.ret,
            pm.class,
            pm.name,
            render_params(&pm.params),
            render_expr(&pm.body)
        );
    }
    out.push_str("}\n");
}

pub fn render_expr(e: &Expr) -> String {
    e.to_string()
}

pub fn render_value(v: &Value) -> String {
    v.to_string()
}

struct Args<'a>(&'a [Expr]);

impl fmt::Display for Args<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Receiver position: scoped forms are parenthesised so the postfix
/// call visibly applies to the whole block.
struct Recv<'a>(&'a Expr);

impl fmt::Display for Recv<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.kind {
            ExprKind::With(..) | ExprKind::Swap(..) => write!(f, "({})", self.0),
            _ => write!(f, "{}", self.0),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Var(x) => write!(f, "{x}"),
            ExprKind::Field(e, name) => write!(f, "{}.{name}", Recv(e)),
            ExprKind::Invoke(e, m, args) => write!(f, "{}.{m}({})", Recv(e), Args(args)),
            ExprKind::New(c, args) => write!(f, "new {c}({})", Args(args)),
            ExprKind::NewLayer(l) => write!(f, "new {l}()"),
            ExprKind::With(l, body) => write!(f, "with {} {{ {body} }}", Recv(l)),
            ExprKind::Swap(l, lsw, body) => write!(f, "swap ({l}, {lsw}) {{ {body} }}"),
            ExprKind::Proceed(args) => write!(f, "proceed({})", Args(args)),
            ExprKind::Super(m, args) => write!(f, "super.{m}({})", Args(args)),
            ExprKind::SuperProceed(args) => write!(f, "superproceed({})", Args(args)),
            ExprKind::InvokeA { recv, cursor, method, args } => {
                write!(f, "{}{cursor}.{method}({})", Value::Obj(recv.clone()), Args(args))
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Obj(o) => {
                write!(f, "new {}(", o.class)?;
                for (i, v) in o.fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Value::Layer(l) => write!(f, "new {l}()"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_runtime_expr};

    #[test]
    fn runtime_forms_use_cursor_notation() {
        let seq = LayerSeq::from_vec(vec!["L1".into(), "L2".into(), "L3".into()]);
        let recv = ObjValue { class: "C".into(), fields: vec![] };
        let e = Expr::invoke_a(recv.clone(), Cursor::triple("C".into(), seq.clone(), seq.clone()), "m", vec![]);
        assert_eq!(e.to_string(), "new C()<C,(L1;L2;L3),(L1;L2;L3)>.m()");
        let q = Expr::invoke_a(recv, Cursor::quad("C".into(), "L4".into(), seq.clone(), seq), "m", vec![]);
        assert_eq!(q.to_string(), "new C()<C,L4,(L1;L2;L3),(L1;L2;L3)>.m()");
    }

    #[test]
    fn program_roundtrip() {
        let src = "class U extends Object {}
            class P extends Object { U a; P self() { return this; } }
            swappable layer S { U P.go(U x) { return x; } }
            layer T extends S requires S { U P.go(U x) { return proceed(x); } }
            main { (with new S() { new P(new U()) }).self().a }";
        let p = parse_program(src).unwrap();
        let again = parse_program(&render_program(&p)).unwrap();
        assert_eq!(again.main, p.main);
        assert_eq!(render_program(&again), render_program(&p));
    }

    #[test]
    fn runtime_expr_roundtrip() {
        let p = parse_program("class C extends Object {} layer L {} main { new C() }").unwrap();
        let text = "new C()<C,L,(L),(L)>.m(new C()<C,•,(L)>.m()).f";
        let e = parse_runtime_expr(&p, text).unwrap();
        assert_eq!(e.to_string(), text);
    }
}
