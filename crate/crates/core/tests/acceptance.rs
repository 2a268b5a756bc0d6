//! Acceptance suite: one criterion per test, each printing a PASS/FAIL
//! line with its runtime (visible with `--nocapture`). Tolerances and
//! runtime budgets are pinned.

use normlab_core::marty::{ScanRegion, SphericalDerivative};
use normlab_core::mero::{differentiate, eval_expr, parse, Expr};
use normlab_core::scenarios;
use normlab_core::sphere::{chordal, spherical, SpherePoint};
use normlab_core::zalcman::{
    compute_step, limit_probe, run_sequence, verify_step, LimitClass, RescalingInput,
    RescalingStep,
};
use normlab_core::{cross_ratio, min_separation};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

fn criterion(number: u32, label: &str, budget: Duration, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let status = if outcome.is_ok() && elapsed <= budget {
        "PASS"
    } else {
        "FAIL"
    };
    println!("criterion {number} ({label}): {status} [{elapsed:.2?} of {budget:.2?}]");
    if let Err(panic) = outcome {
        resume_unwind(panic);
    }
    assert!(
        elapsed <= budget,
        "criterion {number} exceeded its runtime budget: {elapsed:.2?} > {budget:.2?}"
    );
}

#[test]
fn criterion_1_counterexample_metric_values() {
    criterion(1, "counterexample metric values", Duration::from_secs(1), || {
        assert!(
            (spherical(SpherePoint::ZERO, SpherePoint::Infinity) - FRAC_PI_2).abs()
                <= 1e-12
        );
        for k in 0..100 {
            let theta = 2.0 * PI * k as f64 / 100.0;
            let c = SpherePoint::Finite(-Complex64::from_polar(1.0, theta));
            assert!(
                (spherical(SpherePoint::ZERO, c) - FRAC_PI_4).abs() <= 1e-12,
                "theta = {theta}"
            );
        }
        // the separation product of the builtin scenario is pi^3/32 at
        // every grid point and for every n
        let builtin = scenarios::builtin(scenarios::CARA_COUNTEREXAMPLE).unwrap();
        let scenario = builtin.scenario.unwrap();
        let expected = PI.powi(3) / 32.0;
        for &n in &[1u32, 7, 20] {
            let row = min_separation(&scenario, n).unwrap();
            assert!((row.min - expected).abs() <= 1e-12, "n = {n}");
            assert_eq!(row.failed_points, 0);
        }
    });
}

#[test]
fn criterion_2_linear_family_exact_values() {
    criterion(2, "linear family exact values", Duration::from_secs(5), || {
        let sd = SphericalDerivative::new(&parse("n*z + sqrt(n)").unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let n: u32 = rng.gen_range(1..=10_000);
            let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let got = sd.at(n, z).unwrap();
            let nf = n as f64;
            let expected =
                nf / (1.0 + nf * (Complex64::new(1.0, 0.0) + nf.sqrt() * z).norm_sqr());
            assert!(
                (got - expected).abs() <= 1e-10 * expected,
                "n = {n}, z = {z}"
            );
        }
        for n in [1u32, 4, 100, 10_000] {
            let nf = n as f64;
            let z = Complex64::new(-1.0 / nf.sqrt(), 0.0);
            let got = sd.at(n, z).unwrap();
            assert!((got - nf).abs() <= 1e-12 * nf, "n = {n}, got {got}");
        }
    });
}

fn check_sequence_invariants(input: &RescalingInput) -> Vec<RescalingStep> {
    assert!(input.n_list.len() >= 8);
    let report = run_sequence(input).unwrap();
    for step in &report.steps {
        let v = verify_step(input, step).unwrap();
        for check in &v.checks {
            assert!(
                check.passed,
                "n = {}: {} failed with value {} against bound {}",
                step.n, check.name, check.value, check.bound
            );
        }
        let norm = v
            .checks
            .iter()
            .find(|c| c.name == "normalization_sum_gsharp_origin")
            .unwrap();
        assert!((norm.value - 1.0).abs() <= 1e-9);
        let rm = v.checks.iter().find(|c| c.name == "rm_lower_bound").unwrap();
        assert!(rm.margin >= 0.0);
    }
    assert!(report.trend.rho_strictly_decreasing);
    assert!(report.trend.big_r_strictly_increasing);
    report.steps
}

#[test]
fn criterion_3_rescaling_invariants() {
    criterion(3, "rescaling invariants", Duration::from_secs(60), || {
        for name in scenarios::names() {
            let builtin = scenarios::builtin(name).unwrap();
            check_sequence_invariants(&builtin.rescaling);
        }
    });
}

#[test]
fn criterion_4_opposite_limits() {
    criterion(4, "opposite limits", Duration::from_secs(30), || {
        let builtin = scenarios::builtin(scenarios::ZALCMAN_COUNTEREXAMPLE).unwrap();
        for (j0, diverging) in [(1usize, 2usize), (2, 1)] {
            let input = RescalingInput::new(
                builtin.rescaling.families.clone(),
                j0,
                builtin.rescaling.n_list.clone(),
                builtin.rescaling.zstar.clone(),
            )
            .unwrap();
            let steps: Vec<RescalingStep> = input
                .n_list
                .iter()
                .map(|&n| compute_step(&input, n).unwrap())
                .collect();
            let probe = limit_probe(&input, &steps, builtin.probe_radius).unwrap();
            let component = probe
                .components
                .iter()
                .find(|c| c.j == diverging)
                .unwrap();
            assert_eq!(
                component.class,
                LimitClass::ConvergentToInfinity,
                "j0 = {j0}: component {diverging} should diverge, min |g|: {:?}",
                component.min_abs
            );
        }
    });
}

#[test]
fn criterion_5_chordal_identity_and_jordan_chain() {
    criterion(5, "chordal identity and Jordan chain", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1_000_000 {
            let mag_a = 10f64.powf(rng.gen_range(-6.0..6.0));
            let mag_b = 10f64.powf(rng.gen_range(-6.0..6.0));
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                * mag_a;
            let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                * mag_b;
            let pa = SpherePoint::Finite(a);
            let pb = SpherePoint::Finite(b);
            let chi = chordal(pa, pb);
            let lhs = (1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr()) * chi * chi;
            let rhs = (a - b).norm_sqr();
            assert!(
                (lhs - rhs).abs() <= 1e-10 * rhs.max(f64::MIN_POSITIVE),
                "identity violated at a = {a}, b = {b}"
            );
            let sigma = spherical(pa, pb);
            assert!(
                2.0 / PI * sigma <= chi && chi <= sigma,
                "Jordan chain violated at a = {a}, b = {b}: chi = {chi}, sigma = {sigma}"
            );
        }
    });
}

#[test]
fn criterion_6_cross_ratio_contract() {
    criterion(6, "cross-ratio contract", Duration::from_secs(5), || {
        let f = parse("exp(n*z)").unwrap();
        let a = parse("0").unwrap();
        let b = parse("inf").unwrap();
        let c = parse("1").unwrap();
        let cr = cross_ratio(&f, &a, &b, &c);
        assert_eq!(cr, f, "the cross-ratio must simplify to f");

        // on a grid bounded away from the imaginary axis all three
        // omissions hold, and the cross-ratio values stay clear of the
        // reference points 0, 1, infinity
        let region = ScanRegion::disk(Complex64::new(0.3, 0.0), 0.2);
        let targets = [
            SpherePoint::ZERO,
            SpherePoint::finite(1.0, 0.0),
            SpherePoint::Infinity,
        ];
        for n in 1..=20u32 {
            for z in region.points() {
                let v = eval_expr(&cr, n, z).unwrap();
                for t in targets {
                    assert!(
                        chordal(v, t) > 1e-9,
                        "n = {n}, z = {z}: value {v} too close to {t}"
                    );
                }
            }
        }
    });
}

fn brute_force_m(input: &RescalingInput, step: &RescalingStep) -> f64 {
    let sds: Vec<SphericalDerivative> = input
        .families
        .iter()
        .map(|f| SphericalDerivative::new(f).unwrap())
        .collect();
    // 4x finer than the staged search's 64 x 256 grid
    let region = ScanRegion::new(Complex64::new(0.0, 0.0), step.r, 256, 1024).unwrap();
    let mut best = f64::NEG_INFINITY;
    for z in region.points() {
        let weight = 1.0 - z.norm_sqr() / (step.r * step.r);
        let mut sum = 0.0;
        let mut ok = true;
        for sd in &sds {
            match sd.at(step.n, z) {
                Ok(v) => sum += v,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && weight * sum > best {
            best = weight * sum;
        }
    }
    best
}

#[test]
fn criterion_7_maximizer_quality() {
    criterion(7, "maximizer quality", Duration::from_secs(120), || {
        for name in scenarios::names() {
            let input = scenarios::builtin(name).unwrap().rescaling;
            for &n in &input.n_list {
                let step = compute_step(&input, n).unwrap();
                let oracle = brute_force_m(&input, &step);
                let rel = (step.m - oracle).abs() / oracle;
                assert!(
                    rel <= 1e-4,
                    "{name}, n = {n}: staged M = {} vs oracle {} (rel {rel:.2e})",
                    step.m,
                    oracle
                );
            }
        }
    });
}

/// Random holomorphic expressions over a fixed seed.
fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_range(0..10) < 2 {
        return match rng.gen_range(0..6) {
            0 | 1 => Expr::VarZ,
            2 => Expr::ParamN,
            3 => Expr::ParamSqrtN,
            4 => Expr::I,
            _ => Expr::real(rng.gen_range(0.5..2.0)),
        };
    }
    let a = random_expr(rng, depth - 1);
    let b = random_expr(rng, depth - 1);
    match rng.gen_range(0..7) {
        0 => Expr::Add(Box::new(a), Box::new(b)),
        1 => Expr::Sub(Box::new(a), Box::new(b)),
        2 => Expr::Mul(Box::new(a), Box::new(b)),
        3 => Expr::Div(Box::new(a), Box::new(b)),
        4 => Expr::Neg(Box::new(a)),
        5 => Expr::Exp(Box::new(a)),
        _ => {
            let k = *[-3, -2, -1, 2, 3].get(rng.gen_range(0..5)).unwrap();
            Expr::PowInt(Box::new(a), k)
        }
    }
}

#[test]
fn criterion_8_finite_difference_audit() {
    criterion(8, "finite-difference audit", Duration::from_secs(5), || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut audited = 0usize;
        while audited < 100 {
            let e = random_expr(&mut rng, 3);
            let d = match differentiate(&e) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let d2 = match differentiate(&d) {
                Ok(d2) => d2,
                Err(_) => continue,
            };
            let d3 = match differentiate(&d2) {
                Ok(d3) => d3,
                Err(_) => continue,
            };
            let n = rng.gen_range(1..5u32);
            // look for a point where the expression is well conditioned
            let mut point = None;
            for _ in 0..50 {
                let z =
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let finite_at = |expr: &Expr, z: Complex64| {
                    eval_expr(expr, n, z).ok().and_then(|v| v.as_finite())
                };
                let h = 1e-5;
                let ok = [z, z + h, z - h]
                    .iter()
                    .all(|&p| finite_at(&e, p).is_some_and(|v| v.norm() <= 10.0))
                    && finite_at(&d, z).is_some_and(|v| v.norm() <= 10.0)
                    && finite_at(&d3, z).is_some_and(|v| v.norm() <= 1e3);
                if ok {
                    point = Some(z);
                    break;
                }
            }
            let Some(z) = point else { continue };
            let h = 1e-5;
            let f = |p: Complex64| eval_expr(&e, n, p).unwrap().as_finite().unwrap();
            let fd = (f(z + h) - f(z - h)) / (2.0 * h);
            let sym = eval_expr(&d, n, z).unwrap().as_finite().unwrap();
            assert!(
                (fd - sym).norm() <= 1e-6 * sym.norm().max(1.0),
                "expr = {e}, z = {z}: fd = {fd}, symbolic = {sym}"
            );
            audited += 1;
        }
    });
}
