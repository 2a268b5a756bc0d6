//! Spherical derivative computation and Marty-criterion scans over compact
//! disks.
//!
//! The spherical derivative is evaluated on the rationalized form `f = P/Q`
//! as `|P'Q - PQ'| / (|P|^2 + |Q|^2)`, which is finite at poles and agrees
//! with both the direct formula `|f'|/(1+|f|^2)` and its reciprocal-route
//! variant wherever those are defined.

use crate::mero::{differentiate, eval_expr, rationalize, EvalError, Expr, FamilyMember};
use crate::sphere::Indeterminate;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use thiserror::Error;

pub const DEFAULT_RADIAL_POINTS: usize = 64;
pub const DEFAULT_ANGULAR_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MartyError {
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("invalid scan region: {0}")]
    InvalidRegion(String),
    #[error("normality evidence requires at least {required} values of n, got {got}")]
    TooFewSamples { required: usize, got: usize },
}

/// Precomputed projective form of a holomorphic expression, for repeated
/// spherical-derivative evaluation.
#[derive(Debug, Clone)]
pub struct SphericalDerivative {
    numerator: Expr,
    p: Expr,
    q: Expr,
}

impl SphericalDerivative {
    pub fn new(expr: &Expr) -> Result<SphericalDerivative, MartyError> {
        if !expr.is_holomorphic() {
            return Err(EvalError::NonHolomorphic.into());
        }
        let (p, q) = rationalize(expr);
        let dp = differentiate(&p)?;
        let dq = differentiate(&q)?;
        let numerator = crate::mero::sub(
            crate::mero::mul(dp, q.clone()),
            crate::mero::mul(p.clone(), dq),
        );
        Ok(SphericalDerivative { numerator, p, q })
    }

    /// `f#(z)` at a finite point; finite at poles of `f`.
    pub fn at(&self, n: u32, z: Complex64) -> Result<f64, MartyError> {
        let pv = eval_expr(&self.p, n, z)?;
        let qv = eval_expr(&self.q, n, z)?;
        let dv = eval_expr(&self.numerator, n, z)?;
        let denom = pv.abs().hypot(qv.abs()).powi(2);
        let num = dv.abs();
        if denom == 0.0 || (denom.is_infinite() && num.is_infinite()) {
            return Err(EvalError::Indeterminate(Indeterminate::ZeroOverZero).into());
        }
        if denom.is_infinite() {
            return Ok(0.0);
        }
        Ok(num / denom)
    }
}

/// One-off spherical derivative of a family member at a finite point.
pub fn spherical_derivative(member: &FamilyMember, z: Complex64) -> Result<f64, MartyError> {
    SphericalDerivative::new(&member.expr)?.at(member.n, z)
}

/// A closed disk with a fixed polar evaluation grid (radial x angular).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRegion {
    pub center_re: f64,
    pub center_im: f64,
    pub radius: f64,
    pub radial_points: usize,
    pub angular_points: usize,
}

impl ScanRegion {
    pub fn new(
        center: Complex64,
        radius: f64,
        radial_points: usize,
        angular_points: usize,
    ) -> Result<ScanRegion, MartyError> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(MartyError::InvalidRegion(format!(
                "radius must be positive, got {radius}"
            )));
        }
        if radial_points < 2 || angular_points < 2 {
            return Err(MartyError::InvalidRegion(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        Ok(ScanRegion {
            center_re: center.re,
            center_im: center.im,
            radius,
            radial_points,
            angular_points,
        })
    }

    pub fn disk(center: Complex64, radius: f64) -> ScanRegion {
        ScanRegion::new(center, radius, DEFAULT_RADIAL_POINTS, DEFAULT_ANGULAR_POINTS)
            .expect("default grid is valid")
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center_re, self.center_im)
    }

    /// Grid points in a fixed deterministic order: the center once, then
    /// rings of increasing radius, each swept counterclockwise from angle 0.
    pub fn points(&self) -> Vec<Complex64> {
        let mut pts =
            Vec::with_capacity(1 + (self.radial_points - 1) * self.angular_points);
        let c = self.center();
        pts.push(c);
        for i in 1..self.radial_points {
            let r = self.radius * i as f64 / (self.radial_points - 1) as f64;
            for k in 0..self.angular_points {
                let theta = TAU * k as f64 / self.angular_points as f64;
                pts.push(c + Complex64::from_polar(r, theta));
            }
        }
        pts
    }
}

/// One evaluated grid point of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSample {
    pub re: f64,
    pub im: f64,
    pub value: Option<f64>,
}

/// Per-`n` summary of a spherical-derivative scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: u32,
    pub sup: Option<f64>,
    pub argmax_re: f64,
    pub argmax_im: f64,
    pub failed_points: usize,
    pub total_points: usize,
}

impl ScanRow {
    pub fn argmax(&self) -> Complex64 {
        Complex64::new(self.argmax_re, self.argmax_im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    BoundedEvidence,
    DivergentEvidence,
    Inconclusive,
}

/// Scan result: per-`n` suprema with argmax points, the full grid dumps and
/// (when five or more values of `n` are covered) a trend classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub family: String,
    pub region: ScanRegion,
    pub rows: Vec<ScanRow>,
    pub grids: Vec<Vec<GridSample>>,
    pub verdict: Option<Verdict>,
}

impl ScanReport {
    /// CSV table `n,sup,argmax_re,argmax_im` (UTF-8, LF, `.` decimals).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,sup,argmax_re,argmax_im\n");
        for row in &self.rows {
            let sup = row
                .sup
                .map(|s| s.to_string())
                .unwrap_or_else(|| "nan".into());
            let _ = writeln!(out, "{},{},{},{}", row.n, sup, row.argmax_re, row.argmax_im);
        }
        out
    }

    /// CSV dump of every grid sample: `n,z_re,z_im,fsharp`.
    pub fn grid_to_csv(&self) -> String {
        let mut out = String::from("n,z_re,z_im,fsharp\n");
        for (row, grid) in self.rows.iter().zip(&self.grids) {
            for s in grid {
                let v = s.value.map(|v| v.to_string()).unwrap_or_else(|| "nan".into());
                let _ = writeln!(out, "{},{},{},{}", row.n, s.re, s.im, v);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Scans the grid supremum of `f_n#` over the region for each `n`.
/// Per-point evaluation failures are recorded, not fatal.
pub fn marty_scan(
    family: &Expr,
    region: &ScanRegion,
    n_list: &[u32],
) -> Result<ScanReport, MartyError> {
    let sd = SphericalDerivative::new(family)?;
    let points = region.points();
    let mut rows = Vec::with_capacity(n_list.len());
    let mut grids = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut grid = Vec::with_capacity(points.len());
        let mut sup: Option<f64> = None;
        let mut argmax = region.center();
        let mut failed = 0usize;
        for &z in &points {
            match sd.at(n, z) {
                Ok(v) => {
                    grid.push(GridSample {
                        re: z.re,
                        im: z.im,
                        value: Some(v),
                    });
                    if sup.is_none_or(|s| v > s) {
                        sup = Some(v);
                        argmax = z;
                    }
                }
                Err(_) => {
                    failed += 1;
                    grid.push(GridSample {
                        re: z.re,
                        im: z.im,
                        value: None,
                    });
                }
            }
        }
        rows.push(ScanRow {
            n,
            sup,
            argmax_re: argmax.re,
            argmax_im: argmax.im,
            failed_points: failed,
            total_points: points.len(),
        });
        grids.push(grid);
    }
    let mut report = ScanReport {
        family: family.to_string(),
        region: *region,
        rows,
        grids,
        verdict: None,
    };
    if report.rows.len() >= 5 {
        report.verdict = Some(classify(&report));
    }
    Ok(report)
}

fn classify(report: &ScanReport) -> Verdict {
    let sups: Option<Vec<f64>> = report.rows.iter().map(|r| r.sup).collect();
    match sups {
        Some(sups) => classify_sups(&sups),
        None => Verdict::Inconclusive,
    }
}

fn classify_sups(sups: &[f64]) -> Verdict {
    let first = sups[0];
    let last = sups[sups.len() - 1];
    let increasing = sups.windows(2).all(|w| w[1] >= w[0]);
    if increasing && last > 10.0 * first {
        return Verdict::DivergentEvidence;
    }
    let max = sups.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = sups.iter().cloned().fold(f64::INFINITY, f64::min);
    if max <= 2.0 * min {
        return Verdict::BoundedEvidence;
    }
    Verdict::Inconclusive
}

/// Trend classification of a scan covering at least five values of `n`:
/// divergence evidence when the suprema increase and grow by more than a
/// factor of ten, boundedness evidence when they stay within a factor of
/// two. Evidence, never proof.
pub fn normality_evidence(report: &ScanReport) -> Result<Verdict, MartyError> {
    if report.rows.len() < 5 {
        return Err(MartyError::TooFewSamples {
            required: 5,
            got: report.rows.len(),
        });
    }
    Ok(report.verdict.unwrap_or_else(|| classify(report)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mero::parse;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn fam(text: &str) -> Expr {
        parse(text).unwrap()
    }

    #[test]
    fn linear_family_peak_value() {
        // f_n(z) = nz + sqrt(n) has f#(-1/sqrt(n)) = n exactly.
        for n in [1u32, 4, 100, 10_000] {
            let m = FamilyMember::new(fam("n*z + sqrt(n)"), n);
            let z = Complex64::new(-1.0 / (n as f64).sqrt(), 0.0);
            let v = spherical_derivative(&m, z).unwrap();
            assert_relative_eq!(v, n as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_family_vanishes() {
        let m = FamilyMember::new(fam("7"), 3);
        for z in [Complex64::new(0.0, 0.0), Complex64::new(1.5, -2.0)] {
            assert_eq!(spherical_derivative(&m, z).unwrap(), 0.0);
        }
    }

    #[test]
    fn pole_value_via_projective_form() {
        let m = FamilyMember::new(fam("1/z"), 1);
        let v = spherical_derivative(&m, Complex64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exponential_family_at_origin() {
        let m = FamilyMember::new(fam("exp(n*z)"), 3);
        let v = spherical_derivative(&m, Complex64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v, 1.5, epsilon = 1e-13);
    }

    #[test]
    fn non_holomorphic_rejected() {
        let err = SphericalDerivative::new(&fam("re(z)")).unwrap_err();
        assert!(matches!(err, MartyError::Eval(EvalError::NonHolomorphic)));
    }

    #[test]
    fn scan_exponential_family_diverges() {
        let region = ScanRegion::disk(Complex64::new(0.0, 0.0), 0.5);
        let n_list: Vec<u32> = (1..=20).collect();
        let report = marty_scan(&fam("exp(n*z)"), &region, &n_list).unwrap();
        // sup f# over the disk is n/2, attained on Re z = 0.
        let row10 = &report.rows[9];
        assert!(row10.sup.unwrap() >= 5.0 - 1e-12);
        assert_eq!(
            normality_evidence(&report).unwrap(),
            Verdict::DivergentEvidence
        );
    }

    #[test]
    fn scan_constant_family_bounded() {
        let region = ScanRegion::disk(Complex64::new(0.0, 0.0), 0.5);
        let report = marty_scan(&fam("7"), &region, &[1, 2, 3, 4, 5]).unwrap();
        for row in &report.rows {
            assert_eq!(row.sup.unwrap(), 0.0);
        }
        assert_eq!(
            normality_evidence(&report).unwrap(),
            Verdict::BoundedEvidence
        );
    }

    #[test]
    fn scan_shifted_identity_bounded() {
        // f_n(z) = z + 1/n has f# <= 1 everywhere.
        let region = ScanRegion::disk(Complex64::new(0.0, 0.0), 0.5);
        let report = marty_scan(&fam("z + 1/n"), &region, &[1, 2, 3, 4, 5, 6]).unwrap();
        for row in &report.rows {
            assert!(row.sup.unwrap() <= 1.0 + 1e-12);
        }
        assert_eq!(
            normality_evidence(&report).unwrap(),
            Verdict::BoundedEvidence
        );
    }

    #[test]
    fn scan_linear_family_brackets_peak() {
        // Radial grid of 65 points over radius 1/2 places -1/4 on the grid.
        let region =
            ScanRegion::new(Complex64::new(0.0, 0.0), 0.5, 65, 256).unwrap();
        let report = marty_scan(&fam("n*z + sqrt(n)"), &region, &[16]).unwrap();
        let row = &report.rows[0];
        assert!(row.sup.unwrap() >= 16.0 - 1e-9);
        assert_abs_diff_eq!(row.argmax_re, -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(row.argmax_im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn evidence_needs_five_samples() {
        let region = ScanRegion::disk(Complex64::new(0.0, 0.0), 0.5);
        let report = marty_scan(&fam("z"), &region, &[1, 2]).unwrap();
        assert!(matches!(
            normality_evidence(&report).unwrap_err(),
            MartyError::TooFewSamples { .. }
        ));
    }

    #[test]
    fn csv_shape() {
        let region = ScanRegion::new(Complex64::new(0.0, 0.0), 0.5, 3, 4).unwrap();
        let report = marty_scan(&fam("z"), &region, &[1]).unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("n,sup,argmax_re,argmax_im\n"));
        assert_eq!(csv.lines().count(), 2);
        let grid_csv = report.grid_to_csv();
        // center + 2 rings of 4 points
        assert_eq!(grid_csv.lines().count(), 1 + 9);
    }
}
