//! Numerical laboratory for normal families of meromorphic functions on
//! the Riemann sphere: spherical geometry, spherical-derivative scans,
//! the explicit rescaling construction for non-normal sequences, and
//! separation-criterion scenario checking.

pub mod caratheodory;
pub mod marty;
pub mod mero;
pub mod scenarios;
pub mod sphere;
pub mod zalcman;

pub use caratheodory::{
    cross_ratio, liouville_bound_check, min_separation, scenario_check, CaraError,
    FamilyScenario, ScenarioReport,
};
pub use marty::{
    marty_scan, normality_evidence, spherical_derivative, MartyError, ScanRegion,
    ScanReport, SphericalDerivative, Verdict,
};
pub use mero::{
    differentiate, eval, eval_expr, parse, substitute_affine, EvalError, Expr,
    FamilyMember, ParseError,
};
pub use sphere::{chordal, embed, separation_product, spherical, Indeterminate, SpherePoint};
pub use zalcman::{
    compute_step, limit_probe, run_sequence, verify_step, LimitReport, RescalingInput,
    RescalingStep, SequenceReport, StepVerification, ZStarSource, ZalcmanError,
};
