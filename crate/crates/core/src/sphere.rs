//! Extended complex arithmetic and the chordal/spherical metrics on the
//! Riemann sphere.
//!
//! The sphere is realized with radius 1/2 centered at (0, 0, 1/2), so the
//! chordal metric satisfies `chordal(0, inf) = 1` and the spherical (arc)
//! metric is `arcsin` of the chord, with maximum `pi/2`.

use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Indeterminate forms rejected by extended arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Indeterminate {
    #[error("indeterminate form inf - inf")]
    InfMinusInf,
    #[error("indeterminate form 0 * inf")]
    ZeroTimesInf,
    #[error("indeterminate form 0 / 0")]
    ZeroOverZero,
    #[error("indeterminate form inf / inf")]
    InfOverInf,
    #[error("indeterminate form inf^0")]
    InfPowZero,
    #[error("real/imaginary part of the point at infinity")]
    ReImOfInf,
    #[error("operation produced NaN")]
    NanProduced,
}

/// A point of the extended complex plane: a finite value or the point at
/// infinity.
///
/// Arithmetic follows the usual rules on the sphere: `inf ± c = inf`,
/// `inf * c = inf` for `c != 0`, `c / 0 = inf` for `c != 0`, `1 / inf = 0`.
/// The indeterminate forms `inf - inf`, `0 * inf`, `0 / 0` and `inf / inf`
/// are errors, never values. Overflow of a finite operation maps to
/// [`SpherePoint::Infinity`]; NaN is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub const ZERO: SpherePoint = SpherePoint::Finite(Complex64::new(0.0, 0.0));
    pub const ONE: SpherePoint = SpherePoint::Finite(Complex64::new(1.0, 0.0));

    pub fn finite(re: f64, im: f64) -> SpherePoint {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SpherePoint::Finite(c) if c.re == 0.0 && c.im == 0.0)
    }

    /// The finite value, if any.
    pub fn as_finite(&self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(c) => Some(*c),
            SpherePoint::Infinity => None,
        }
    }

    /// Modulus; `f64::INFINITY` for the point at infinity.
    pub fn abs(&self) -> f64 {
        match self {
            SpherePoint::Finite(c) => c.norm(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    /// Maps a raw complex result into the extended plane: overflowed
    /// components become the point at infinity, NaN is an error.
    fn sanitize(c: Complex64) -> Result<SpherePoint, Indeterminate> {
        if c.re.is_nan() || c.im.is_nan() {
            Err(Indeterminate::NanProduced)
        } else if c.re.is_infinite() || c.im.is_infinite() {
            Ok(SpherePoint::Infinity)
        } else {
            Ok(SpherePoint::Finite(c))
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, rhs: SpherePoint) -> Result<SpherePoint, Indeterminate> {
        use SpherePoint::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Self::sanitize(a + b),
            (Infinity, Infinity) => Err(Indeterminate::InfMinusInf),
            _ => Ok(Infinity),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, rhs: SpherePoint) -> Result<SpherePoint, Indeterminate> {
        use SpherePoint::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Self::sanitize(a - b),
            (Infinity, Infinity) => Err(Indeterminate::InfMinusInf),
            _ => Ok(Infinity),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> SpherePoint {
        match self {
            SpherePoint::Finite(c) => SpherePoint::Finite(-c),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: SpherePoint) -> Result<SpherePoint, Indeterminate> {
        use SpherePoint::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Self::sanitize(a * b),
            (Infinity, p) | (p, Infinity) => {
                if p.is_zero() {
                    Err(Indeterminate::ZeroTimesInf)
                } else {
                    Ok(Infinity)
                }
            }
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(self, rhs: SpherePoint) -> Result<SpherePoint, Indeterminate> {
        use SpherePoint::*;
        match (self, rhs) {
            (Infinity, Infinity) => Err(Indeterminate::InfOverInf),
            (Infinity, _) => Ok(Infinity),
            (Finite(_), Infinity) => Ok(SpherePoint::ZERO),
            (Finite(a), Finite(b)) => {
                if b.re == 0.0 && b.im == 0.0 {
                    if a.re == 0.0 && a.im == 0.0 {
                        Err(Indeterminate::ZeroOverZero)
                    } else {
                        Ok(Infinity)
                    }
                } else {
                    Self::sanitize(a / b)
                }
            }
        }
    }

    pub fn powi(self, k: i32) -> Result<SpherePoint, Indeterminate> {
        use SpherePoint::*;
        match self {
            Infinity => match k.cmp(&0) {
                std::cmp::Ordering::Greater => Ok(Infinity),
                std::cmp::Ordering::Less => Ok(SpherePoint::ZERO),
                std::cmp::Ordering::Equal => Err(Indeterminate::InfPowZero),
            },
            Finite(c) => {
                if c.re == 0.0 && c.im == 0.0 {
                    match k.cmp(&0) {
                        std::cmp::Ordering::Greater => Ok(SpherePoint::ZERO),
                        std::cmp::Ordering::Less => Ok(Infinity),
                        std::cmp::Ordering::Equal => Ok(SpherePoint::ONE),
                    }
                } else {
                    Self::sanitize(c.powi(k))
                }
            }
        }
    }

    /// 1/z with the conventions 1/0 = inf and 1/inf = 0.
    pub fn inv(self) -> SpherePoint {
        use SpherePoint::*;
        match self {
            Infinity => SpherePoint::ZERO,
            Finite(c) => {
                if c.re == 0.0 && c.im == 0.0 {
                    Infinity
                } else {
                    Self::sanitize(c.inv()).unwrap_or(Infinity)
                }
            }
        }
    }

    pub fn conj(self) -> SpherePoint {
        match self {
            SpherePoint::Finite(c) => SpherePoint::Finite(c.conj()),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(c: Complex64) -> Self {
        SpherePoint::Finite(c)
    }
}

impl From<f64> for SpherePoint {
    fn from(x: f64) -> Self {
        SpherePoint::Finite(Complex64::new(x, 0.0))
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpherePoint::Infinity => write!(f, "inf"),
            SpherePoint::Finite(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", c.re)
                } else {
                    write!(f, "{}{}{}i", c.re, if c.im < 0.0 { "-" } else { "+" }, c.im.abs())
                }
            }
        }
    }
}

/// A point on the sphere of radius 1/2 centered at (0, 0, 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddedPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl EmbeddedPoint {
    /// Euclidean distance to another embedded point; equals the chordal
    /// metric of the preimages.
    pub fn chord_to(&self, other: &EmbeddedPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dt = self.t - other.t;
        (dx * dx + dy * dy + dt * dt).sqrt()
    }
}

/// Chordal metric: `|z - w| / (sqrt(1+|z|^2) * sqrt(1+|w|^2))` for finite
/// points, `1 / sqrt(1+|z|^2)` when exactly one point is infinite, 0 when
/// both are. Values lie in `[0, 1]`.
pub fn chordal(z: SpherePoint, w: SpherePoint) -> f64 {
    use SpherePoint::*;
    let c = match (z, w) {
        (Finite(a), Finite(b)) => {
            let d = (a - b).norm();
            d / (a.norm().hypot(1.0) * b.norm().hypot(1.0))
        }
        (Finite(a), Infinity) | (Infinity, Finite(a)) => 1.0 / a.norm().hypot(1.0),
        (Infinity, Infinity) => 0.0,
    };
    c.clamp(0.0, 1.0)
}

/// The antipodal point `-1/conj(z)`.
fn antipode(z: SpherePoint) -> SpherePoint {
    match z {
        SpherePoint::Infinity => SpherePoint::ZERO,
        SpherePoint::Finite(c) if c.re == 0.0 && c.im == 0.0 => SpherePoint::Infinity,
        SpherePoint::Finite(c) => {
            let n = c.norm_sqr();
            SpherePoint::Finite(Complex64::new(-c.re / n, -c.im / n))
        }
    }
}

/// Chordal distance from `z` to the antipode of `w`, i.e. the cosine term
/// complementing `chordal(z, w)`:
/// `|1 + z*conj(w)| / (sqrt(1+|z|^2) * sqrt(1+|w|^2))`.
fn chordal_complement(z: SpherePoint, w: SpherePoint) -> f64 {
    use SpherePoint::*;
    // canonical operand order makes the result bitwise symmetric
    let key = |p: &SpherePoint| match p {
        Infinity => (f64::INFINITY, 0.0, 0.0),
        Finite(c) => (c.norm_sqr(), c.re, c.im),
    };
    let (z, w) = if key(&w) > key(&z) { (w, z) } else { (z, w) };
    match (z, w) {
        (Infinity, p) | (p, Infinity) => chordal(SpherePoint::ZERO, p),
        (Finite(a), Finite(b)) => {
            // route the antipode through the larger operand so neither the
            // product nor the reciprocal can overflow
            if a.norm_sqr() > 1.0 {
                chordal(antipode(Finite(a)), Finite(b))
            } else if b.norm_sqr() > 1.0 {
                chordal(Finite(a), antipode(Finite(b)))
            } else {
                let p = Complex64::new(1.0, 0.0) + a * b.conj();
                let c = p.norm() / (a.norm().hypot(1.0) * b.norm().hypot(1.0));
                c.clamp(0.0, 1.0)
            }
        }
    }
}

/// Spherical (arc) metric, `arcsin(chordal)` with values in `[0, pi/2]`.
/// Evaluated as `atan2(sin, cos)` with the cosine term computed directly,
/// which stays accurate where `asin` alone would lose precision near
/// antipodal pairs.
pub fn spherical(z: SpherePoint, w: SpherePoint) -> f64 {
    chordal(z, w).atan2(chordal_complement(z, w))
}

/// Stereographic embedding `(Re z, Im z, |z|^2) / (1 + |z|^2)`; infinity
/// maps to the north pole (0, 0, 1).
pub fn embed(z: SpherePoint) -> EmbeddedPoint {
    match z {
        SpherePoint::Infinity => EmbeddedPoint { x: 0.0, y: 0.0, t: 1.0 },
        SpherePoint::Finite(c) => {
            let denom = 1.0 + c.norm_sqr();
            EmbeddedPoint {
                x: c.re / denom,
                y: c.im / denom,
                t: c.norm_sqr() / denom,
            }
        }
    }
}

/// The product `sigma(a,b) * sigma(a,c) * sigma(b,c)`; zero iff two of the
/// arguments coincide, invariant under permutations.
pub fn separation_product(a: SpherePoint, b: SpherePoint, c: SpherePoint) -> f64 {
    spherical(a, b) * spherical(a, c) * spherical(b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pt(re: f64, im: f64) -> SpherePoint {
        SpherePoint::finite(re, im)
    }

    #[test]
    fn chordal_poles() {
        assert_abs_diff_eq!(chordal(SpherePoint::ZERO, SpherePoint::Infinity), 1.0);
        assert_abs_diff_eq!(
            chordal(SpherePoint::ZERO, SpherePoint::ONE),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_eq!(chordal(pt(3.0, -2.0), pt(3.0, -2.0)), 0.0);
        assert_eq!(chordal(SpherePoint::Infinity, SpherePoint::Infinity), 0.0);
    }

    #[test]
    fn spherical_counterexample_values() {
        assert_abs_diff_eq!(
            spherical(SpherePoint::ZERO, SpherePoint::Infinity),
            FRAC_PI_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            spherical(SpherePoint::ZERO, pt(-1.0, 0.0)),
            FRAC_PI_4,
            epsilon = 1e-15
        );
        assert_eq!(spherical(pt(0.25, 1.5), pt(0.25, 1.5)), 0.0);
    }

    #[test]
    fn separation_product_values() {
        let p = separation_product(SpherePoint::ZERO, SpherePoint::Infinity, pt(-1.0, 0.0));
        assert_abs_diff_eq!(p, PI.powi(3) / 32.0, epsilon = 1e-14);
        let q = separation_product(SpherePoint::ZERO, SpherePoint::ONE, SpherePoint::Infinity);
        assert_abs_diff_eq!(q, PI.powi(3) / 32.0, epsilon = 1e-14);
        assert_eq!(
            separation_product(pt(2.0, 0.0), pt(2.0, 0.0), SpherePoint::ONE),
            0.0
        );
    }

    #[test]
    fn embed_values() {
        let south = embed(SpherePoint::ZERO);
        assert_eq!((south.x, south.y, south.t), (0.0, 0.0, 0.0));
        let north = embed(SpherePoint::Infinity);
        assert_eq!((north.x, north.y, north.t), (0.0, 0.0, 1.0));
        let one = embed(SpherePoint::ONE);
        assert_abs_diff_eq!(one.x, 0.5);
        assert_abs_diff_eq!(one.y, 0.0);
        assert_abs_diff_eq!(one.t, 0.5);
        // Chord between embeddings equals the chordal metric.
        let chord = one.chord_to(&embed(SpherePoint::ZERO));
        assert_abs_diff_eq!(chord, chordal(SpherePoint::ONE, SpherePoint::ZERO), epsilon = 1e-12);
    }

    #[test]
    fn embedded_points_lie_on_sphere() {
        for &z in &[
            SpherePoint::ZERO,
            SpherePoint::Infinity,
            pt(1.5, -0.75),
            pt(-200.0, 13.0),
        ] {
            let e = embed(z);
            let r2 = e.x * e.x + e.y * e.y + (e.t - 0.5) * (e.t - 0.5);
            assert_abs_diff_eq!(r2, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn arithmetic_rules() {
        use SpherePoint::Infinity;
        assert_eq!(Infinity.add(pt(3.0, 1.0)).unwrap(), Infinity);
        assert_eq!(Infinity.mul(pt(2.0, 0.0)).unwrap(), Infinity);
        assert_eq!(pt(1.0, 0.0).div(SpherePoint::ZERO).unwrap(), Infinity);
        assert_eq!(SpherePoint::ONE.div(Infinity).unwrap(), SpherePoint::ZERO);
        assert_eq!(
            Infinity.sub(Infinity).unwrap_err(),
            Indeterminate::InfMinusInf
        );
        assert_eq!(
            SpherePoint::ZERO.mul(Infinity).unwrap_err(),
            Indeterminate::ZeroTimesInf
        );
        assert_eq!(
            SpherePoint::ZERO.div(SpherePoint::ZERO).unwrap_err(),
            Indeterminate::ZeroOverZero
        );
        assert_eq!(Infinity.div(Infinity).unwrap_err(), Indeterminate::InfOverInf);
    }

    #[test]
    fn overflow_maps_to_infinity() {
        let huge = pt(1e308, 0.0);
        assert_eq!(huge.mul(pt(10.0, 0.0)).unwrap(), SpherePoint::Infinity);
        assert_eq!(huge.add(huge).unwrap(), SpherePoint::Infinity);
    }
}
