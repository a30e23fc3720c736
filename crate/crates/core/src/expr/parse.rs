//! Recursive-descent parser.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := '-' term | product
//! product  := factor (('*' | '/') factor)*
//! factor   := '-' factor | power
//! power    := primary ('^' exponent)?
//! exponent := INTEGER ('^' exponent)?
//! primary  := NUMBER | 'x' | 'pi' | PARAM | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! A leading minus negates the whole product that follows it, so `-k*x` is
//! `Neg(Mul(k, x))`.

use super::{Expr, ExprError, Func};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(u32),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn syntax(offset: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax { offset, message: message.into() }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((i, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let mut integral = !src[start..i].contains('.');
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                        integral = false;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                let tok = match text.parse::<u32>() {
                    Ok(n) if integral => Tok::Int(n),
                    _ => Tok::Num(value),
                };
                out.push((start, tok));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a, S> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    params: &'a [S],
}

/// Parse `source` into an [`Expr`]. Identifiers other than `x`, `pi`, the
/// functions and the names in `params` are rejected.
pub fn parse<S: AsRef<str>>(source: &str, params: &[S]) -> Result<Expr, ExprError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0, end: source.len(), params };
    let e = p.expr()?;
    if let Some((off, tok)) = p.peek_full() {
        return Err(syntax(off, format!("unexpected {}", describe(&tok))));
    }
    Ok(e)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Int(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
    }
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_full(&self) -> Option<(usize, Tok)> {
        self.toks.get(self.pos).cloned()
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.term()?)));
        }
        self.product()
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat_op('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if self.eat_op('^') {
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<u32, ExprError> {
        let off = self.offset();
        let n = match self.peek_full() {
            Some((_, Tok::Int(n))) => {
                self.pos += 1;
                n
            }
            _ => return Err(syntax(off, "exponent must be a nonnegative integer literal")),
        };
        if self.eat_op('^') {
            let m = self.exponent()?;
            return n
                .checked_pow(m)
                .ok_or_else(|| syntax(off, "exponent overflow"));
        }
        Ok(n)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let off = self.offset();
        let Some((_, tok)) = self.peek_full() else {
            return Err(syntax(off, "unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Int(n) => Ok(Expr::Num(n as f64)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen(off)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(syntax(self.offset(), format!("expected `(` after `{name}`")));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen(off)?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "pi" => Ok(Expr::Pi),
                    _ if self.params.iter().any(|p| p.as_ref() == name) => Ok(Expr::Param(name)),
                    _ => Err(ExprError::UnknownIdentifier { name, offset: off }),
                }
            }
            other => Err(syntax(off, format!("unexpected {}", describe(&other)))),
        }
    }

    fn expect_rparen(&mut self, open: usize) -> Result<(), ExprError> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("unclosed `(` opened at byte {open}")))
        }
    }
}
