//! Parser and printer for the expression grammar.
//!
//! Precedence, low to high: additive (`+`, `-`), multiplicative (`*`, `/`),
//! unary `-`, power (`^` with an integer literal). Atoms: `z`, `n`,
//! `sqrt(n)`, `i`, decimal literals, `inf`, `exp(..)`, `re(..)`, `im(..)`,
//! `conj(..)`, parentheses. `parse(print(e))` is structurally equal to `e`
//! for any parsed `e`.

use super::{Expr, MAX_EXPONENT};
use crate::sphere::SpherePoint;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("empty input")]
    EmptyInput,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("exponent {0} out of range (|k| <= {MAX_EXPONENT})")]
    ExponentOutOfRange(i64),
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("malformed number literal")]
    BadNumber,
    #[error("trailing input")]
    TrailingInput,
}

/// Syntax error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

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
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::BadNumber,
                })?;
                toks.push((start, Tok::Num(v)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    kind: ParseErrorKind::UnexpectedChar(c),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind,
        }
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.err(ParseErrorKind::Expected(what))),
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.multiplicative()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.multiplicative()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let k = self.exponent()?;
            return Ok(Expr::PowInt(Box::new(base), k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parenthesized = matches!(self.peek(), Some(Tok::LParen));
        if parenthesized {
            self.pos += 1;
        }
        let mut sign = 1i64;
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            sign = -1;
        }
        let off = self.offset();
        let k = match self.bump() {
            Some(Tok::Num(v)) => {
                if v.fract() != 0.0 {
                    return Err(ParseError {
                        offset: off,
                        kind: ParseErrorKind::Expected("integer exponent"),
                    });
                }
                sign * v as i64
            }
            Some(_) => {
                return Err(ParseError {
                    offset: off,
                    kind: ParseErrorKind::Expected("integer exponent"),
                })
            }
            None => {
                return Err(ParseError {
                    offset: off,
                    kind: ParseErrorKind::UnexpectedEnd,
                })
            }
        };
        if parenthesized {
            self.expect(Tok::RParen, "closing parenthesis")?;
        }
        if k.abs() > MAX_EXPONENT {
            return Err(ParseError {
                offset: off,
                kind: ParseErrorKind::ExponentOutOfRange(k),
            });
        }
        Ok(k as i32)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::real(v)),
            Some(Tok::LParen) => {
                let e = self.additive()?;
                self.expect(Tok::RParen, "closing parenthesis")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "z" => Ok(Expr::VarZ),
                "n" => Ok(Expr::ParamN),
                "i" => Ok(Expr::I),
                "inf" => Ok(Expr::Const(SpherePoint::Infinity)),
                "sqrt" => {
                    self.expect(Tok::LParen, "opening parenthesis")?;
                    let arg_off = self.offset();
                    match self.bump() {
                        Some(Tok::Ident(arg)) if arg == "n" => {}
                        _ => {
                            return Err(ParseError {
                                offset: arg_off,
                                kind: ParseErrorKind::Expected("`n` (only sqrt(n) is supported)"),
                            })
                        }
                    }
                    self.expect(Tok::RParen, "closing parenthesis")?;
                    Ok(Expr::ParamSqrtN)
                }
                "exp" | "re" | "im" | "conj" => {
                    self.expect(Tok::LParen, "opening parenthesis")?;
                    let arg = self.additive()?;
                    self.expect(Tok::RParen, "closing parenthesis")?;
                    Ok(match name.as_str() {
                        "exp" => Expr::Exp(Box::new(arg)),
                        "re" => Expr::Re(Box::new(arg)),
                        "im" => Expr::Im(Box::new(arg)),
                        _ => Expr::Conj(Box::new(arg)),
                    })
                }
                _ => Err(ParseError {
                    offset: off,
                    kind: ParseErrorKind::UnknownIdentifier(name),
                }),
            },
            Some(_) => Err(ParseError {
                offset: off,
                kind: ParseErrorKind::Expected("expression atom"),
            }),
            None => Err(ParseError {
                offset: off,
                kind: ParseErrorKind::UnexpectedEnd,
            }),
        }
    }
}

/// Parses an expression in the surface grammar.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::EmptyInput,
        });
    }
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.additive()?;
    if p.pos != p.toks.len() {
        return Err(p.err(ParseErrorKind::TrailingInput));
    }
    Ok(e)
}

// Printing precedence levels; a child is parenthesized when its level is
// below what its position requires.
fn prec(e: &Expr) -> u8 {
    use Expr::*;
    match e {
        Add(..) | Sub(..) => 1,
        Mul(..) | Div(..) => 2,
        Neg(..) => 3,
        PowInt(..) => 4,
        Const(SpherePoint::Finite(c)) if c.im != 0.0 || c.re < 0.0 => 0,
        _ => 5,
    }
}

fn print_prec(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        print(e, f)?;
        write!(f, ")")
    } else {
        print(e, f)
    }
}

pub(super) fn print(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    use Expr::*;
    match e {
        Const(SpherePoint::Infinity) => write!(f, "inf"),
        Const(SpherePoint::Finite(c)) => {
            // Only nonnegative reals are parseable literals; other constants
            // (from folding) print as an equivalent compound form.
            if c.im == 0.0 {
                if c.re >= 0.0 {
                    write!(f, "{}", c.re)
                } else {
                    write!(f, "-{}", -c.re)
                }
            } else if c.re == 0.0 {
                if c.im >= 0.0 {
                    write!(f, "{}*i", c.im)
                } else {
                    write!(f, "-{}*i", -c.im)
                }
            } else {
                let (op, im) = if c.im >= 0.0 { ("+", c.im) } else { ("-", -c.im) };
                if c.re >= 0.0 {
                    write!(f, "{} {} {}*i", c.re, op, im)
                } else {
                    write!(f, "-{} {} {}*i", -c.re, op, im)
                }
            }
        }
        VarZ => write!(f, "z"),
        ParamN => write!(f, "n"),
        ParamSqrtN => write!(f, "sqrt(n)"),
        I => write!(f, "i"),
        Add(a, b) => {
            print_prec(a, 1, f)?;
            write!(f, " + ")?;
            print_prec(b, 2, f)
        }
        Sub(a, b) => {
            print_prec(a, 1, f)?;
            write!(f, " - ")?;
            print_prec(b, 2, f)
        }
        Mul(a, b) => {
            print_prec(a, 2, f)?;
            write!(f, "*")?;
            print_prec(b, 3, f)
        }
        Div(a, b) => {
            print_prec(a, 2, f)?;
            write!(f, "/")?;
            print_prec(b, 3, f)
        }
        Neg(a) => {
            write!(f, "-")?;
            print_prec(a, 3, f)
        }
        PowInt(a, k) => {
            print_prec(a, 5, f)?;
            if *k >= 0 {
                write!(f, "^{}", k)
            } else {
                write!(f, "^(-{})", -(*k as i64))
            }
        }
        Exp(a) => {
            write!(f, "exp(")?;
            print(a, f)?;
            write!(f, ")")
        }
        Re(a) => {
            write!(f, "re(")?;
            print(a, f)?;
            write!(f, ")")
        }
        Im(a) => {
            write!(f, "im(")?;
            print(a, f)?;
            write!(f, ")")
        }
        Conj(a) => {
            write!(f, "conj(")?;
            print(a, f)?;
            write!(f, ")")
        }
    }
}
