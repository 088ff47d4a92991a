//! Recursive-descent parser for the profile DSL.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter than
//! unary minus on the left operand):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | 'x' | 'pi' | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `jacobi_sn(u, k)` / `jacobi_sd(u, k)` take the modulus k (a constant
//! expression, 0 <= k < 1) as second argument; `sd` is lowered to `sn/dn`.

use super::{Expr, *};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

type Spanned = (Tok, (usize, usize));

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<Spanned>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(tok) = lx.next_token()? {
            out.push(tok);
        }
        Ok(out)
    }

    fn err(&self, at: usize, message: impl Into<String>) -> Error {
        Error::Parse { message: message.into(), span: (at, (at + 1).min(self.src.len())) }
    }

    fn next_token(&mut self) -> Result<Option<Spanned>> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = bytes[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                if self.pos < bytes.len() && (bytes[self.pos] | 32) == b'e' {
                    self.pos += 1;
                    if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-')
                    {
                        self.pos += 1;
                    }
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
                let text = &self.src[start..self.pos];
                let v: f64 = text
                    .parse()
                    .map_err(|_| self.err(start, format!("malformed number `{text}`")))?;
                return Ok(Some((Tok::Num(v), (start, self.pos))));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                return Ok(Some((
                    Tok::Ident(self.src[start..self.pos].to_string()),
                    (start, self.pos),
                )));
            }
            other => {
                return Err(self.err(start, format!("unexpected character `{}`", other as char)))
            }
        };
        self.pos += 1;
        Ok(Some((tok, (start, self.pos))))
    }
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn span(&self) -> (usize, usize) {
        self.toks
            .get(self.idx)
            .map(|&(_, s)| s)
            .unwrap_or((self.end, self.end))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { message: message.into(), span: self.span() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    lhs = add(lhs, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    lhs = sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    lhs = mul(lhs, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    lhs = div(lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            return Ok(neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let exponent = self.factor()?;
            return Ok(pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let span = self.span();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => self.named(&name, span),
            _ => Err(Error::Parse { message: "expected expression".into(), span }),
        }
    }

    fn named(&mut self, name: &str, span: (usize, usize)) -> Result<Expr> {
        match name {
            "x" => return Ok(Expr::X),
            "pi" => return Ok(num(std::f64::consts::PI)),
            _ => {}
        }
        self.expect(Tok::LParen, &format!("`(` after function `{name}`"))?;
        let first = self.expr()?;
        let out = match name {
            "sin" => sin(first),
            "cos" => cos(first),
            "ln" => ln(first),
            "exp" => exp(first),
            "pow" => {
                self.expect(Tok::Comma, "`,` between pow arguments")?;
                let e = self.expr()?;
                pow(first, e)
            }
            "jacobi_sn" | "jacobi_sd" => {
                self.expect(Tok::Comma, "`,` before the elliptic modulus")?;
                let kspan = self.span();
                let kexpr = self.expr()?;
                if kexpr.depends_on_x() {
                    return Err(Error::Parse {
                        message: "elliptic modulus must be constant".into(),
                        span: kspan,
                    });
                }
                let k = kexpr.eval(0.0).map_err(|e| Error::Parse {
                    message: format!("bad elliptic modulus: {e}"),
                    span: kspan,
                })?;
                if !(0.0..1.0).contains(&k) {
                    return Err(Error::Parse {
                        message: format!("elliptic modulus k = {k} outside [0, 1)"),
                        span: kspan,
                    });
                }
                let m = k * k;
                if name == "jacobi_sn" {
                    jacobi_sn(first, m)
                } else {
                    div(jacobi_sn(first.clone(), m), jacobi_dn(first, m))
                }
            }
            _ => {
                return Err(Error::Parse {
                    message: format!("unknown function `{name}`"),
                    span,
                })
            }
        };
        self.expect(Tok::RParen, "closing `)`")?;
        Ok(out)
    }
}

/// Parse a DSL source string into an expression tree.
pub fn parse(src: &str) -> Result<Expr> {
    let toks = Lexer::tokenize(src)?;
    let mut p = Parser { toks, idx: 0, end: src.len() };
    let e = p.expr()?;
    if p.idx < p.toks.len() {
        return Err(p.err("trailing input after expression"));
    }
    Ok(e)
}
