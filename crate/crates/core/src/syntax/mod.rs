//! Concrete syntax: lexer, recursive-descent parser and pretty-printer.

mod lexer;
mod parser;
mod render;

pub use lexer::{lex, LexError, Tok, Token};
pub use parser::{parse_program, parse_runtime_expr, parse_unvalidated, LoadError, ParseError};
pub use render::{render_expr, render_program, render_value};
