//! The two built-in counterexample scenarios, preconfigured with scan
//! regions and index lists that exhibit their published behavior.

use crate::caratheodory::FamilyScenario;
use crate::marty::ScanRegion;
use crate::mero::{parse, Expr};
use crate::zalcman::{RescalingInput, ZStarSource};
use num_complex::Complex64;

pub const CARA_COUNTEREXAMPLE: &str = "cara-counterexample";
pub const ZALCMAN_COUNTEREXAMPLE: &str = "zalcman-counterexample";

/// A named, fully configured experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Builtin {
    pub name: &'static str,
    /// The separation-criterion scenario, when the example provides omitted
    /// functions.
    pub scenario: Option<FamilyScenario>,
    /// The family whose spherical derivative is scanned.
    pub scan_family: Expr,
    pub scan_region: ScanRegion,
    pub scan_n_list: Vec<u32>,
    pub rescaling: RescalingInput,
    pub probe_radius: f64,
}

pub fn names() -> [&'static str; 2] {
    [CARA_COUNTEREXAMPLE, ZALCMAN_COUNTEREXAMPLE]
}

pub fn builtin(name: &str) -> Option<Builtin> {
    match name {
        CARA_COUNTEREXAMPLE => Some(cara_counterexample()),
        ZALCMAN_COUNTEREXAMPLE => Some(zalcman_counterexample()),
        _ => None,
    }
}

/// The family f_n(z) = e^{nz} with omitted functions a = 0, b = infinity
/// and the moving unimodular target c_n(z) = -e^{i n Im z}. The pairwise
/// separation product is pi^3/32 everywhere, every omission holds, yet the
/// family diverges at the imaginary axis: only the meromorphy of c is
/// given up.
fn cara_counterexample() -> Builtin {
    let f = parse("exp(n*z)").expect("builtin expression parses");
    let domain = ScanRegion::disk(Complex64::new(0.0, 0.0), 0.5);
    let n_list: Vec<u32> = (1..=20).collect();
    let scenario = FamilyScenario::new(
        CARA_COUNTEREXAMPLE,
        f.clone(),
        parse("0").expect("builtin expression parses"),
        parse("inf").expect("builtin expression parses"),
        parse("-exp(i*n*im(z))").expect("builtin expression parses"),
        0.9,
        domain,
        n_list.clone(),
    )
    .expect("builtin scenario is valid");
    let rescaling = RescalingInput::new(
        vec![f.clone()],
        1,
        vec![10, 15, 20, 25, 30, 35, 40, 45],
        ZStarSource::Auto,
    )
    .expect("builtin rescaling input is valid");
    Builtin {
        name: CARA_COUNTEREXAMPLE,
        scenario: Some(scenario),
        scan_family: f,
        scan_region: domain,
        scan_n_list: n_list,
        rescaling,
        probe_radius: 1.0,
    }
}

/// The pair f_n(z) = nz + sqrt(n), g_n(z) = -nz + sqrt(n): each family is
/// non-normal at the origin, and under the rescaling adapted to one of
/// them the other tends to infinity. No omitted functions exist, so there
/// is no separation scenario.
fn zalcman_counterexample() -> Builtin {
    let f1 = parse("n*z + sqrt(n)").expect("builtin expression parses");
    let f2 = parse("-n*z + sqrt(n)").expect("builtin expression parses");
    let scan_region = ScanRegion::new(Complex64::new(0.0, 0.0), 0.5, 256, 256)
        .expect("builtin region is valid");
    // indices large enough that the component diverging under the
    // rescaling exceeds the infinity classification threshold on the
    // default probe disk
    let rescaling = RescalingInput::new(
        vec![f1.clone(), f2],
        1,
        vec![
            300_000, 600_000, 1_200_000, 2_400_000, 4_800_000, 9_600_000, 19_200_000,
            38_400_000,
        ],
        ZStarSource::Auto,
    )
    .expect("builtin rescaling input is valid");
    Builtin {
        name: ZALCMAN_COUNTEREXAMPLE,
        scenario: None,
        scan_family: f1,
        scan_region,
        scan_n_list: vec![10, 20, 40, 80, 160],
        rescaling,
        probe_radius: 1.0,
    }
}
