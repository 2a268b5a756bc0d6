//! Evaluation in the extended complex plane, with pole handling and a
//! bounded derivative-quotient (L'Hopital) retry for indeterminate
//! quotients.

use super::{add, div, mul, neg, powint, sub, differentiate, Expr, FamilyMember};
use crate::sphere::{Indeterminate, SpherePoint};
use num_complex::Complex64;
use thiserror::Error;

/// Retry depth for derivative-quotient resolution of 0/0 and inf/inf.
const LHOPITAL_DEPTH: u8 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("indeterminate value: {0}")]
    Indeterminate(Indeterminate),
    #[error("essential singularity: exp evaluated at infinity")]
    EssentialSingularity,
    #[error("operation requires a holomorphic expression (no re/im/conj)")]
    NonHolomorphic,
}

impl From<Indeterminate> for EvalError {
    fn from(i: Indeterminate) -> Self {
        EvalError::Indeterminate(i)
    }
}

/// Evaluates a family member at a point of the extended plane.
///
/// Division of a nonzero numerator by zero yields infinity (a pole).
/// Evaluation at infinity is supported only for expressions rational in `z`
/// (`exp` of a `z`-dependent argument errors with
/// [`EvalError::EssentialSingularity`]).
pub fn eval(member: &FamilyMember, z: SpherePoint) -> Result<SpherePoint, EvalError> {
    match z {
        SpherePoint::Finite(c) => eval_at(&member.expr, member.n, c, LHOPITAL_DEPTH),
        SpherePoint::Infinity => eval_at_infinity(&member.expr, member.n),
    }
}

/// Evaluates a bare expression at a finite point.
pub fn eval_expr(expr: &Expr, n: u32, z: Complex64) -> Result<SpherePoint, EvalError> {
    eval_at(expr, n, z, LHOPITAL_DEPTH)
}

fn eval_at(e: &Expr, n: u32, z: Complex64, depth: u8) -> Result<SpherePoint, EvalError> {
    use Expr::*;
    match e {
        Const(p) => Ok(*p),
        VarZ => Ok(SpherePoint::Finite(z)),
        ParamN => Ok(SpherePoint::from(n as f64)),
        ParamSqrtN => Ok(SpherePoint::from((n as f64).sqrt())),
        I => Ok(SpherePoint::Finite(Complex64::i())),
        Add(a, b) => Ok(eval_at(a, n, z, depth)?.add(eval_at(b, n, z, depth)?)?),
        Sub(a, b) => Ok(eval_at(a, n, z, depth)?.sub(eval_at(b, n, z, depth)?)?),
        Neg(a) => Ok(eval_at(a, n, z, depth)?.neg()),
        Mul(a, b) => Ok(eval_at(a, n, z, depth)?.mul(eval_at(b, n, z, depth)?)?),
        Div(a, b) => eval_quotient(a, b, n, z, depth),
        PowInt(a, k) => Ok(eval_at(a, n, z, depth)?.powi(*k)?),
        Exp(a) => match eval_at(a, n, z, depth)? {
            SpherePoint::Finite(c) => Ok(SpherePoint::Finite(c.exp()).pipe_sanitize()?),
            SpherePoint::Infinity => Err(EvalError::EssentialSingularity),
        },
        Re(a) => match eval_at(a, n, z, depth)? {
            SpherePoint::Finite(c) => Ok(SpherePoint::finite(c.re, 0.0)),
            SpherePoint::Infinity => Err(Indeterminate::ReImOfInf.into()),
        },
        Im(a) => match eval_at(a, n, z, depth)? {
            SpherePoint::Finite(c) => Ok(SpherePoint::finite(c.im, 0.0)),
            SpherePoint::Infinity => Err(Indeterminate::ReImOfInf.into()),
        },
        Conj(a) => Ok(eval_at(a, n, z, depth)?.conj()),
    }
}

trait PipeSanitize {
    fn pipe_sanitize(self) -> Result<SpherePoint, Indeterminate>;
}

impl PipeSanitize for SpherePoint {
    fn pipe_sanitize(self) -> Result<SpherePoint, Indeterminate> {
        match self {
            SpherePoint::Finite(c) if c.re.is_nan() || c.im.is_nan() => {
                Err(Indeterminate::NanProduced)
            }
            SpherePoint::Finite(c) if c.re.is_infinite() || c.im.is_infinite() => {
                Ok(SpherePoint::Infinity)
            }
            p => Ok(p),
        }
    }
}

fn eval_quotient(
    num: &Expr,
    den: &Expr,
    n: u32,
    z: Complex64,
    depth: u8,
) -> Result<SpherePoint, EvalError> {
    let vn = eval_at(num, n, z, depth)?;
    let vd = eval_at(den, n, z, depth)?;
    match vn.div(vd) {
        Ok(v) => Ok(v),
        Err(form @ (Indeterminate::ZeroOverZero | Indeterminate::InfOverInf)) => {
            if depth == 0 || !num.is_holomorphic() || !den.is_holomorphic() {
                return Err(form.into());
            }
            let dn = differentiate(num)?;
            let dd = differentiate(den)?;
            eval_quotient(&dn, &dd, n, z, depth - 1).map_err(|e| match e {
                // Report the original indeterminate form when the retry
                // chain cannot resolve it.
                EvalError::Indeterminate(
                    Indeterminate::ZeroOverZero | Indeterminate::InfOverInf,
                ) => form.into(),
                other => other,
            })
        }
        Err(form) => Err(form.into()),
    }
}

fn eval_at_infinity(e: &Expr, n: u32) -> Result<SpherePoint, EvalError> {
    if has_exp_of_z(e) {
        return Err(EvalError::EssentialSingularity);
    }
    if !e.is_holomorphic() && e.depends_on_z() {
        return Err(Indeterminate::ReImOfInf.into());
    }
    // f(inf) = lim_{w -> 0} f(1/w), computed on the rationalized quotient so
    // that the derivative-quotient retry can strip common zeros.
    let inverted = substitute_z(e, &Expr::PowInt(Box::new(Expr::VarZ), -1));
    let (p, q) = rationalize(&inverted);
    eval_quotient(&p, &q, n, Complex64::new(0.0, 0.0), LHOPITAL_DEPTH)
}

fn has_exp_of_z(e: &Expr) -> bool {
    use Expr::*;
    match e {
        Exp(a) => a.depends_on_z() || has_exp_of_z(a),
        Const(_) | VarZ | ParamN | ParamSqrtN | I => false,
        Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => has_exp_of_z(a) || has_exp_of_z(b),
        Neg(a) | Re(a) | Im(a) | Conj(a) => has_exp_of_z(a),
        PowInt(a, _) => has_exp_of_z(a),
    }
}

fn substitute_z(e: &Expr, replacement: &Expr) -> Expr {
    use Expr::*;
    match e {
        VarZ => replacement.clone(),
        Const(_) | ParamN | ParamSqrtN | I => e.clone(),
        Add(a, b) => add(substitute_z(a, replacement), substitute_z(b, replacement)),
        Sub(a, b) => sub(substitute_z(a, replacement), substitute_z(b, replacement)),
        Mul(a, b) => mul(substitute_z(a, replacement), substitute_z(b, replacement)),
        Div(a, b) => div(substitute_z(a, replacement), substitute_z(b, replacement)),
        Neg(a) => neg(substitute_z(a, replacement)),
        PowInt(a, k) => powint(substitute_z(a, replacement), *k),
        Exp(a) => Exp(Box::new(substitute_z(a, replacement))),
        Re(a) => Re(Box::new(substitute_z(a, replacement))),
        Im(a) => Im(Box::new(substitute_z(a, replacement))),
        Conj(a) => Conj(Box::new(substitute_z(a, replacement))),
    }
}

pub(super) fn substitute_var(e: &Expr, replacement: &Expr) -> Expr {
    substitute_z(e, replacement)
}

/// Rewrites `e = P/Q` with `P`, `Q` free of `Div` and of negative powers,
/// treating `exp`, `re`, `im` and `conj` subtrees as atomic factors. This is
/// the projective form used for pole-safe spherical derivatives and for
/// evaluation at infinity.
pub fn rationalize(e: &Expr) -> (Expr, Expr) {
    use Expr::*;
    let one = Expr::real(1.0);
    match e {
        Const(SpherePoint::Infinity) => (one.clone(), Expr::real(0.0)),
        Const(_) | VarZ | ParamN | ParamSqrtN | I | Exp(_) | Re(_) | Im(_) | Conj(_) => {
            (e.clone(), one)
        }
        Add(a, b) => {
            let (pa, qa) = rationalize(a);
            let (pb, qb) = rationalize(b);
            (
                add(mul(pa, qb.clone()), mul(pb, qa.clone())),
                mul(qa, qb),
            )
        }
        Sub(a, b) => {
            let (pa, qa) = rationalize(a);
            let (pb, qb) = rationalize(b);
            (
                sub(mul(pa, qb.clone()), mul(pb, qa.clone())),
                mul(qa, qb),
            )
        }
        Neg(a) => {
            let (pa, qa) = rationalize(a);
            (neg(pa), qa)
        }
        Mul(a, b) => {
            let (pa, qa) = rationalize(a);
            let (pb, qb) = rationalize(b);
            (mul(pa, pb), mul(qa, qb))
        }
        Div(a, b) => {
            let (pa, qa) = rationalize(a);
            let (pb, qb) = rationalize(b);
            (mul(pa, qb), mul(qa, pb))
        }
        PowInt(a, k) => {
            let (pa, qa) = rationalize(a);
            if *k >= 0 {
                (powint(pa, *k), powint(qa, *k))
            } else {
                (powint(qa, -*k), powint(pa, -*k))
            }
        }
    }
}
