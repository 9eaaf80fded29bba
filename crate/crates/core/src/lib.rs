//! Context-oriented Featherweight Java with layer inheritance, layer
//! subtyping and swappable layers: parser, lookup, small-step evaluator,
//! type checker, and soundness/differential harness.

pub mod ast;
pub mod harness;
pub mod intern;
pub mod lookup;
pub mod relations;
pub mod semantics;
pub mod syntax;
pub mod typing;
pub mod validate;

pub use ast::{ClassName, Cursor, Expr, ExprKind, LayerName, LayerSeq, LayerSet, Location, MethodName, Program, Tables, Type, TypeEnv, Value};
pub use syntax::{parse_program, parse_runtime_expr, render_expr, render_program, LoadError, ParseError};
pub use typing::{check_program, type_expr, TypeError};
