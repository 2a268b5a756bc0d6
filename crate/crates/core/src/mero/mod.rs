//! Expression trees for families of functions of `z` with an integer family
//! parameter `n`: parsing, printing, evaluation with pole handling and
//! symbolic differentiation.

mod diff;
mod eval;
mod parse;

pub use diff::{differentiate, substitute_affine};
pub use eval::{eval, eval_expr, rationalize, EvalError};
pub use parse::{parse, ParseError, ParseErrorKind};

use crate::sphere::SpherePoint;
use num_complex::Complex64;
use std::fmt;

/// Largest admissible `|k|` for `^k` in the surface grammar.
pub const MAX_EXPONENT: i64 = 64;

/// Expression tree for a function of `z` with integer family parameter `n`.
///
/// `Re`, `Im` and `Conj` are admitted for evaluation only; an expression is
/// holomorphic iff it contains none of them, and differentiation is defined
/// only on holomorphic expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(SpherePoint),
    VarZ,
    ParamN,
    ParamSqrtN,
    /// The imaginary unit.
    I,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    PowInt(Box<Expr>, i32),
    Exp(Box<Expr>),
    Re(Box<Expr>),
    Im(Box<Expr>),
    Conj(Box<Expr>),
}

impl Expr {
    pub fn constant(c: Complex64) -> Expr {
        Expr::Const(SpherePoint::Finite(c))
    }

    pub fn real(x: f64) -> Expr {
        Expr::Const(SpherePoint::finite(x, 0.0))
    }

    /// True iff the expression contains none of `Re`, `Im`, `Conj`.
    pub fn is_holomorphic(&self) -> bool {
        use Expr::*;
        match self {
            Const(_) | VarZ | ParamN | ParamSqrtN | I => true,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.is_holomorphic() && b.is_holomorphic()
            }
            Neg(a) | Exp(a) => a.is_holomorphic(),
            PowInt(a, _) => a.is_holomorphic(),
            Re(_) | Im(_) | Conj(_) => false,
        }
    }

    /// True iff the value depends on `z`.
    pub fn depends_on_z(&self) -> bool {
        use Expr::*;
        match self {
            VarZ => true,
            Const(_) | ParamN | ParamSqrtN | I => false,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.depends_on_z() || b.depends_on_z()
            }
            Neg(a) | Exp(a) | Re(a) | Im(a) | Conj(a) => a.depends_on_z(),
            PowInt(a, _) => a.depends_on_z(),
        }
    }

    /// Replaces `n` and `sqrt(n)` by numeric constants.
    pub fn bind_n(&self, n: u32) -> Expr {
        use Expr::*;
        match self {
            ParamN => Expr::real(n as f64),
            ParamSqrtN => Expr::real((n as f64).sqrt()),
            Const(_) | VarZ | I => self.clone(),
            Add(a, b) => add(a.bind_n(n), b.bind_n(n)),
            Sub(a, b) => sub(a.bind_n(n), b.bind_n(n)),
            Mul(a, b) => mul(a.bind_n(n), b.bind_n(n)),
            Div(a, b) => div(a.bind_n(n), b.bind_n(n)),
            Neg(a) => neg(a.bind_n(n)),
            PowInt(a, k) => powint(a.bind_n(n), *k),
            Exp(a) => Exp(Box::new(a.bind_n(n))),
            Re(a) => Re(Box::new(a.bind_n(n))),
            Im(a) => Im(Box::new(a.bind_n(n))),
            Conj(a) => Conj(Box::new(a.bind_n(n))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        parse::print(self, f)
    }
}

/// One member of a family: an expression together with its index `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub expr: Expr,
    pub n: u32,
}

impl FamilyMember {
    /// Panics if `n == 0`.
    pub fn new(expr: Expr, n: u32) -> FamilyMember {
        assert!(n >= 1, "family index must be >= 1");
        FamilyMember { expr, n }
    }
}

fn const_value(e: &Expr) -> Option<SpherePoint> {
    match e {
        Expr::Const(p) => Some(*p),
        _ => None,
    }
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(SpherePoint::Finite(c)) if c.re == v && c.im == 0.0)
}

// Constant-folding constructors. Used by differentiation, affine
// substitution and rationalization; the parser keeps raw structure.
// They build `Expr` trees rather than operating on self, so the names
// intentionally shadow the std::ops trait methods.

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return b;
    }
    if is_const(&b, 0.0) {
        return a;
    }
    if let (Some(x), Some(y)) = (const_value(&a), const_value(&b)) {
        if let Ok(v) = x.add(y) {
            return Expr::Const(v);
        }
    }
    Expr::Add(Box::new(a), Box::new(b))
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 0.0) {
        return a;
    }
    if let (Some(x), Some(y)) = (const_value(&a), const_value(&b)) {
        if let Ok(v) = x.sub(y) {
            return Expr::Const(v);
        }
    }
    if is_const(&a, 0.0) {
        return neg(b);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(p) => Expr::Const(p.neg()),
        Expr::Neg(inner) => *inner,
        _ => Expr::Neg(Box::new(a)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    // 0 * x -> 0 is the usual symbolic convention; derivatives rely on it.
    if is_const(&a, 0.0) || is_const(&b, 0.0) {
        return Expr::real(0.0);
    }
    if is_const(&a, 1.0) {
        return b;
    }
    if is_const(&b, 1.0) {
        return a;
    }
    if let (Some(x), Some(y)) = (const_value(&a), const_value(&b)) {
        if let Ok(v) = x.mul(y) {
            return Expr::Const(v);
        }
    }
    if is_const(&a, -1.0) {
        return neg(b);
    }
    if is_const(&b, -1.0) {
        return neg(a);
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 1.0) {
        return a;
    }
    if let (Some(x), Some(y)) = (const_value(&a), const_value(&b)) {
        if let Ok(v) = x.div(y) {
            return Expr::Const(v);
        }
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub(crate) fn powint(a: Expr, k: i32) -> Expr {
    if k == 1 {
        return a;
    }
    if let Some(x) = const_value(&a) {
        if let Ok(v) = x.powi(k) {
            return Expr::Const(v);
        }
    }
    Expr::PowInt(Box::new(a), k)
}
