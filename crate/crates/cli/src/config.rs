//! TOML scenario configuration and its resolution into core inputs.

use crate::CliError;
use normlab_core::marty::ScanRegion;
use normlab_core::mero::{eval_expr, parse, Expr};
use normlab_core::scenarios::{self, Builtin};
use normlab_core::sphere::SpherePoint;
use normlab_core::zalcman::{RescalingInput, ZStarSource};
use normlab_core::FamilyScenario;
use num_complex::Complex64;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Family under test, in the expression grammar.
    pub f: String,
    pub a: Option<String>,
    pub b: Option<String>,
    pub c: Option<String>,
    /// Families for the rescaling construction; defaults to `[f]`.
    pub families: Option<Vec<String>>,
    pub epsilon: Option<f64>,
    pub n_list: Vec<u32>,
    pub domain: DomainConfig,
    pub grid: Option<GridConfig>,
    pub out_dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Point literal in the expression grammar, e.g. `0` or `0.3 + 0.2*i`.
    pub center: String,
    pub radius: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub radial: usize,
    pub angular: usize,
}

/// A config or builtin resolved into ready-to-run core inputs.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub name: String,
    pub scenario: Option<FamilyScenario>,
    pub scan_family: Expr,
    pub scan_region: ScanRegion,
    pub scan_n_list: Vec<u32>,
    pub families: Vec<Expr>,
    pub rescale_n_list: Vec<u32>,
    pub rescale_zstar: ZStarSource,
    pub rescale_j0: Option<usize>,
    pub probe_radius: f64,
    pub out_dir: Option<String>,
}

impl Resolved {
    pub fn rescaling_input(&self, j0_flag: Option<usize>) -> Result<RescalingInput, CliError> {
        let j0 = match (j0_flag, self.rescale_j0, self.families.len()) {
            (Some(j), _, _) => j,
            (None, Some(j), _) => j,
            (None, None, 1) => 1,
            (None, None, p) => {
                return Err(CliError::Usage(format!(
                    "--j0 is required: the input has {p} families"
                )))
            }
        };
        RescalingInput::new(
            self.families.clone(),
            j0,
            self.rescale_n_list.clone(),
            self.rescale_zstar.clone(),
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// Parses an expression that must not depend on z and evaluates it to a
/// point on the sphere.
pub fn parse_point(text: &str) -> Result<SpherePoint, CliError> {
    let expr = parse(text)
        .map_err(|e| CliError::Usage(format!("cannot parse point '{text}': {e}")))?;
    if expr.depends_on_z() {
        return Err(CliError::Usage(format!(
            "point literal '{text}' must not depend on z"
        )));
    }
    eval_expr(&expr, 1, Complex64::new(0.0, 0.0))
        .map_err(|e| CliError::Usage(format!("cannot evaluate point '{text}': {e}")))
}

fn parse_expr(text: &str, what: &str) -> Result<Expr, CliError> {
    parse(text).map_err(|e| CliError::Usage(format!("cannot parse {what} '{text}': {e}")))
}

fn from_builtin(b: Builtin) -> Resolved {
    Resolved {
        name: b.name.to_string(),
        scenario: b.scenario,
        scan_family: b.scan_family,
        scan_region: b.scan_region,
        scan_n_list: b.scan_n_list,
        families: b.rescaling.families.clone(),
        rescale_n_list: b.rescaling.n_list.clone(),
        rescale_zstar: b.rescaling.zstar.clone(),
        rescale_j0: Some(b.rescaling.j0),
        probe_radius: b.probe_radius,
        out_dir: None,
    }
}

fn from_config(cfg: ScenarioConfig) -> Result<Resolved, CliError> {
    let f = parse_expr(&cfg.f, "f")?;
    let center = match parse_point(&cfg.domain.center)? {
        SpherePoint::Finite(c) => c,
        SpherePoint::Infinity => {
            return Err(CliError::Usage("domain center must be finite".into()))
        }
    };
    let (radial, angular) = match &cfg.grid {
        Some(g) => (g.radial, g.angular),
        None => (
            normlab_core::marty::DEFAULT_RADIAL_POINTS,
            normlab_core::marty::DEFAULT_ANGULAR_POINTS,
        ),
    };
    let region = ScanRegion::new(center, cfg.domain.radius, radial, angular)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if cfg.n_list.is_empty() || cfg.n_list.contains(&0) {
        return Err(CliError::Usage(
            "n_list must be nonempty with entries >= 1".into(),
        ));
    }

    let scenario = match (&cfg.a, &cfg.b, &cfg.c, cfg.epsilon) {
        (Some(a), Some(b), Some(c), Some(eps)) => Some(
            FamilyScenario::new(
                cfg.name.clone(),
                f.clone(),
                parse_expr(a, "a")?,
                parse_expr(b, "b")?,
                parse_expr(c, "c")?,
                eps,
                region,
                cfg.n_list.clone(),
            )
            .map_err(|e| CliError::Usage(e.to_string()))?,
        ),
        (None, None, None, _) => None,
        _ => {
            return Err(CliError::Usage(
                "a, b, c and epsilon must be given together".into(),
            ))
        }
    };

    let families = match &cfg.families {
        Some(list) if !list.is_empty() => list
            .iter()
            .map(|t| parse_expr(t, "family"))
            .collect::<Result<Vec<_>, _>>()?,
        _ => vec![f.clone()],
    };

    Ok(Resolved {
        name: cfg.name,
        scenario,
        scan_family: f,
        scan_region: region,
        scan_n_list: cfg.n_list.clone(),
        families,
        rescale_n_list: cfg.n_list,
        rescale_zstar: ZStarSource::Auto,
        rescale_j0: None,
        probe_radius: 1.0,
        out_dir: cfg.out_dir,
    })
}

/// Resolves a builtin name or a TOML config path.
pub fn resolve(target: &str) -> Result<Resolved, CliError> {
    if let Some(b) = scenarios::builtin(target) {
        return Ok(from_builtin(b));
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "'{target}' is neither a builtin scenario ({}) nor an existing config file",
            scenarios::names().join(", ")
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read '{target}': {e}")))?;
    let cfg: ScenarioConfig = toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config '{target}': {e}")))?;
    from_config(cfg)
}
