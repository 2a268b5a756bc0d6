//! Symbolic differentiation with respect to `z` and affine reparametrization
//! `z -> center + scale * z`.

use super::eval::substitute_var;
use super::{add, div, mul, neg, powint, sub, EvalError, Expr};
use num_complex::Complex64;

/// Symbolic derivative with respect to `z`; results are simplified by
/// constant folding only. Errors on `re`/`im`/`conj` nodes.
pub fn differentiate(e: &Expr) -> Result<Expr, EvalError> {
    use Expr::*;
    Ok(match e {
        Const(_) | ParamN | ParamSqrtN | I => Expr::real(0.0),
        VarZ => Expr::real(1.0),
        Add(a, b) => add(differentiate(a)?, differentiate(b)?),
        Sub(a, b) => sub(differentiate(a)?, differentiate(b)?),
        Neg(a) => neg(differentiate(a)?),
        Mul(a, b) => add(
            mul(differentiate(a)?, (**b).clone()),
            mul((**a).clone(), differentiate(b)?),
        ),
        Div(a, b) => div(
            sub(
                mul(differentiate(a)?, (**b).clone()),
                mul((**a).clone(), differentiate(b)?),
            ),
            powint((**b).clone(), 2),
        ),
        PowInt(a, k) => {
            if *k == 0 {
                Expr::real(0.0)
            } else {
                mul(
                    mul(Expr::real(*k as f64), powint((**a).clone(), k - 1)),
                    differentiate(a)?,
                )
            }
        }
        Exp(a) => mul(differentiate(a)?, Exp(a.clone())),
        Re(_) | Im(_) | Conj(_) => return Err(EvalError::NonHolomorphic),
    })
}

/// Returns the expression `zeta -> e(center + scale * zeta)`, constant
/// folded. `scale` must be nonzero.
pub fn substitute_affine(e: &Expr, center: Complex64, scale: Complex64) -> Expr {
    assert!(
        scale.re != 0.0 || scale.im != 0.0,
        "affine substitution requires a nonzero scale"
    );
    let replacement = add(
        Expr::constant(center),
        mul(Expr::constant(scale), Expr::VarZ),
    );
    substitute_var(e, &replacement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mero::{eval_expr, parse};
    use approx::assert_abs_diff_eq;
    use Expr::*;

    #[test]
    fn chain_rule_on_exp() {
        let e = parse("exp(n*z)").unwrap();
        let d = differentiate(&e).unwrap();
        assert_eq!(
            d,
            Mul(
                Box::new(ParamN),
                Box::new(Exp(Box::new(Mul(Box::new(ParamN), Box::new(VarZ)))))
            )
        );
    }

    #[test]
    fn linear_family() {
        let e = parse("n*z + sqrt(n)").unwrap();
        assert_eq!(differentiate(&e).unwrap(), ParamN);
    }

    #[test]
    fn power_rule_negative_exponent() {
        let e = parse("z^(-1)").unwrap();
        assert_eq!(
            differentiate(&e).unwrap(),
            Neg(Box::new(PowInt(Box::new(VarZ), -2)))
        );
    }

    #[test]
    fn non_holomorphic_rejected() {
        let e = parse("re(z)").unwrap();
        assert_eq!(differentiate(&e).unwrap_err(), EvalError::NonHolomorphic);
    }

    #[test]
    fn identity_rescale() {
        let e = parse("z").unwrap();
        let s = substitute_affine(&e, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(s, VarZ);
    }

    #[test]
    fn rescaled_linear_family_vanishes_at_origin() {
        // With n bound to 4, f(z) = 4z + 2 recentred at -1/2 becomes
        // 4*rho*zeta; the constant term cancels exactly.
        let e = parse("n*z + sqrt(n)").unwrap().bind_n(4);
        let rho = Complex64::new(0.125, 0.0);
        let s = substitute_affine(&e, Complex64::new(-0.5, 0.0), rho);
        let v0 = eval_expr(&s, 4, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v0.abs(), 0.0);
        let v1 = eval_expr(&s, 4, Complex64::new(1.0, 0.0))
            .unwrap()
            .as_finite()
            .unwrap();
        assert_abs_diff_eq!(v1.re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        let e = parse("exp(n*z)").unwrap();
        let center = Complex64::new(0.1, -0.2);
        let scale = Complex64::new(0.05, 0.02);
        let s = substitute_affine(&e, center, scale);
        let zeta = Complex64::new(0.7, 0.3);
        let lhs = eval_expr(&s, 3, zeta).unwrap().as_finite().unwrap();
        let rhs = eval_expr(&e, 3, center + scale * zeta)
            .unwrap()
            .as_finite()
            .unwrap();
        assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-12);
        assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-12);
    }
}
