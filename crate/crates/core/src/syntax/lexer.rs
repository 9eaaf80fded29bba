use std::fmt;

use crate::ast::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Class,
    Extends,
    Layer,
    Swappable,
    Requires,
    Main,
    Return,
    New,
    This,
    Proceed,
    SuperProceed,
    Super,
    With,
    Swap,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Lt,
    Gt,
    Bullet,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Class => "`class`",
            Tok::Extends => "`extends`",
            Tok::Layer => "`layer`",
            Tok::Swappable => "`swappable`",
            Tok::Requires => "`requires`",
            Tok::Main => "`main`",
            Tok::Return => "`return`",
            Tok::New => "`new`",
            Tok::This => "`this`",
            Tok::Proceed => "`proceed`",
            Tok::SuperProceed => "`superproceed`",
            Tok::Super => "`super`",
            Tok::With => "`with`",
            Tok::Swap => "`swap`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Dot => "`.`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Bullet => "`•`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub found: char,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "class" => Tok::Class,
        "extends" => Tok::Extends,
        "layer" => Tok::Layer,
        "swappable" => Tok::Swappable,
        "requires" => Tok::Requires,
        "main" => Tok::Main,
        "return" => Tok::Return,
        "new" => Tok::New,
        "this" => Tok::This,
        "proceed" => Tok::Proceed,
        "superproceed" => Tok::SuperProceed,
        "super" => Tok::Super,
        "with" => Tok::With,
        "swap" => Tok::Swap,
        _ => return None,
    })
}

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut it = src.char_indices().peekable();
    while let Some(&(start, c)) = it.peek() {
        let span_at = |end: usize| Span { start, end, line, col };
        if c == '\n' {
            it.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            it.next();
            col += 1;
            continue;
        }
        if c == '/' && src[start..].starts_with("//") {
            while let Some(&(_, c)) = it.peek() {
                if c == '\n' {
                    break;
                }
                it.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut end = start;
            while let Some(&(i, c)) = it.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = i + c.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            let word = &src[start..end];
            let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_owned()));
            out.push(Token { tok, span: span_at(end) });
            col += (end - start) as u32;
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '•' => Tok::Bullet,
            other => return Err(LexError { span: span_at(start + other.len_utf8()), found: other }),
        };
        it.next();
        out.push(Token { tok, span: span_at(start + c.len_utf8()) });
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, span: Span { start: src.len(), end: src.len(), line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = lex("class C // note\n  extends •").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds, vec![Tok::Class, Tok::Ident("C".into()), Tok::Extends, Tok::Bullet, Tok::Eof]);
        assert_eq!((toks[2].span.line, toks[2].span.col), (2, 3));
        assert_eq!((toks[3].span.line, toks[3].span.col), (2, 11));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = lex("main { 1 }").unwrap_err();
        assert_eq!(err.found, '1');
        assert_eq!(err.span.col, 8);
    }

    #[test]
    fn keywords_need_word_boundaries() {
        let toks = lex("superproceed super withx").unwrap();
        assert_eq!(toks[0].tok, Tok::SuperProceed);
        assert_eq!(toks[1].tok, Tok::Super);
        assert_eq!(toks[2].tok, Tok::Ident("withx".into()));
    }
}
