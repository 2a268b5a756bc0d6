//! `normlab`: scans, rescaling experiments and scenario checks for normal
//! families of meromorphic functions, driven by builtin scenarios or TOML
//! configs. Reports are deterministic CSV/JSON.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{parse_point, resolve, Resolved};
use normlab_core::marty::{marty_scan, ScanReport};
use normlab_core::mero::{parse, FamilyMember};
use normlab_core::sphere::{chordal, spherical};
use normlab_core::zalcman::{limit_probe, run_sequence, verify_step};
use normlab_core::{cross_ratio, min_separation, scenario_check, spherical_derivative};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Fraction of failed grid evaluations above which a scan is reported as
/// degraded (exit code 3).
const DEGRADATION_THRESHOLD: f64 = 0.1;

#[derive(Debug)]
pub enum CliError {
    /// Bad usage or configuration: exit 2.
    Usage(String),
    /// Too many grid points failed to evaluate: exit 3.
    Degraded(String),
    /// A theorem-guaranteed verification check failed: exit 4.
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Degraded(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Degraded(m) | CliError::Verification(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "normlab",
    about = "Numerical laboratory for normal families on the Riemann sphere",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the chordal and spherical distance between two points.
    Metric {
        /// First point: a constant expression or `inf`.
        #[arg(allow_hyphen_values = true)]
        a: String,
        /// Second point: a constant expression or `inf`.
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Evaluate the spherical derivative of a family member at a point.
    Sphder {
        /// Family expression in z and n.
        expr: String,
        #[arg(long)]
        n: u32,
        /// Evaluation point: a constant expression.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Scan the grid supremum of the spherical derivative over n.
    Scan {
        #[command(flatten)]
        target: Target,
        /// Which expression of the scenario to scan.
        #[arg(long, default_value = "f")]
        which: Which,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the rescaling construction, verify it and probe the limits.
    Rescale {
        #[command(flatten)]
        target: Target,
        /// 1-based index of the distinguished family.
        #[arg(long)]
        j0: Option<usize>,
        /// Locate each z* automatically (the default).
        #[arg(long, conflicts_with = "zstar_list")]
        auto_zstar: bool,
        /// Explicit z* points, one `re,im` pair per index, separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        zstar_list: Option<String>,
        /// Radius of the limit-probe disk.
        #[arg(long)]
        probe_radius: Option<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Tabulate the minimum pairwise separation product of a, b, c.
    Separation {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the cross-ratio normalization sending a, b, c to 0, inf, 1.
    Crossratio {
        #[command(flatten)]
        target: Target,
    },
    /// List builtin scenarios or run a full scenario check.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Which {
    F,
    A,
    B,
    C,
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Print the builtin scenario names.
    List,
    /// Run the composite scenario report.
    Run {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct Target {
    /// Builtin scenario name or TOML config path.
    name: String,
}

#[derive(Args)]
struct Overrides {
    /// Output directory for CSV/JSON reports; no files without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid override as `RADIAL,ANGULAR`.
    #[arg(long)]
    grid: Option<String>,
    /// Index list override as comma-separated integers.
    #[arg(long)]
    n_list: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Metric { a, b } => cmd_metric(&a, &b),
        Command::Sphder { expr, n, z } => cmd_sphder(&expr, n, &z),
        Command::Scan {
            target,
            which,
            overrides,
        } => cmd_scan(&target.name, which, &overrides),
        Command::Rescale {
            target,
            j0,
            auto_zstar: _,
            zstar_list,
            probe_radius,
            overrides,
        } => cmd_rescale(&target.name, j0, zstar_list.as_deref(), probe_radius, &overrides),
        Command::Separation { target, overrides } => {
            cmd_separation(&target.name, &overrides)
        }
        Command::Crossratio { target } => cmd_crossratio(&target.name),
        Command::Scenario { action } => match action {
            ScenarioAction::List => {
                for name in normlab_core::scenarios::names() {
                    println!("{name}");
                }
                Ok(())
            }
            ScenarioAction::Run { target, overrides } => {
                cmd_scenario_run(&target.name, &overrides)
            }
        },
    }
}

fn cmd_metric(a: &str, b: &str) -> Result<(), CliError> {
    let pa = parse_point(a)?;
    let pb = parse_point(b)?;
    println!("chi = {:.15}", chordal(pa, pb));
    println!("sigma = {:.15}", spherical(pa, pb));
    Ok(())
}

fn cmd_sphder(expr: &str, n: u32, z: &str) -> Result<(), CliError> {
    let e = parse(expr).map_err(|e| CliError::Usage(format!("cannot parse '{expr}': {e}")))?;
    if n == 0 {
        return Err(CliError::Usage("n must be >= 1".into()));
    }
    let z = match parse_point(z)? {
        normlab_core::SpherePoint::Finite(c) => c,
        normlab_core::SpherePoint::Infinity => {
            return Err(CliError::Usage("evaluation point must be finite".into()))
        }
    };
    let v = spherical_derivative(&FamilyMember::new(e, n), z)
        .map_err(|e| CliError::Degraded(e.to_string()))?;
    println!("fsharp = {:.15}", v);
    Ok(())
}

fn apply_overrides(resolved: &mut Resolved, overrides: &Overrides) -> Result<(), CliError> {
    if let Some(grid) = &overrides.grid {
        let parts: Vec<&str> = grid.split(',').collect();
        let parsed: Option<(usize, usize)> = match parts.as_slice() {
            [r, a] => r.trim().parse().ok().zip(a.trim().parse().ok()),
            _ => None,
        };
        let (radial, angular) = parsed.ok_or_else(|| {
            CliError::Usage(format!("--grid expects RADIAL,ANGULAR, got '{grid}'"))
        })?;
        let region = normlab_core::ScanRegion::new(
            resolved.scan_region.center(),
            resolved.scan_region.radius,
            radial,
            angular,
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        resolved.scan_region = region;
        if let Some(s) = &mut resolved.scenario {
            s.domain = region;
        }
    }
    if let Some(list) = &overrides.n_list {
        let parsed: Option<Vec<u32>> =
            list.split(',').map(|t| t.trim().parse().ok()).collect();
        let n_list = parsed.filter(|v: &Vec<u32>| !v.is_empty() && !v.contains(&0));
        let n_list = n_list.ok_or_else(|| {
            CliError::Usage(format!("--n-list expects positive integers, got '{list}'"))
        })?;
        resolved.scan_n_list = n_list.clone();
        resolved.rescale_n_list = n_list.clone();
        if let Some(s) = &mut resolved.scenario {
            s.n_list = n_list;
        }
    }
    Ok(())
}

fn out_dir<'a>(overrides: &'a Overrides, resolved: &'a Resolved) -> Option<PathBuf> {
    overrides
        .out
        .clone()
        .or_else(|| resolved.out_dir.as_ref().map(PathBuf::from))
}

fn write_report(dir: &Path, file: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create '{}': {e}", dir.display())))?;
    let path = dir.join(file);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write '{}': {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn check_degradation(report: &ScanReport) -> Result<(), CliError> {
    let failed: usize = report.rows.iter().map(|r| r.failed_points).sum();
    let total: usize = report.rows.iter().map(|r| r.total_points).sum();
    if total > 0 && (failed as f64) > DEGRADATION_THRESHOLD * total as f64 {
        return Err(CliError::Degraded(format!(
            "{failed} of {total} grid evaluations failed"
        )));
    }
    Ok(())
}

fn cmd_scan(name: &str, which: Which, overrides: &Overrides) -> Result<(), CliError> {
    let mut resolved = resolve(name)?;
    apply_overrides(&mut resolved, overrides)?;
    let expr = match which {
        Which::F => resolved.scan_family.clone(),
        other => {
            let s = resolved.scenario.as_ref().ok_or_else(|| {
                CliError::Usage(format!(
                    "'{name}' has no omitted functions; only --which f is available"
                ))
            })?;
            match other {
                Which::A => s.a.clone(),
                Which::B => s.b.clone(),
                Which::C => s.c.clone(),
                Which::F => unreachable!(),
            }
        }
    };
    if !expr.is_holomorphic() {
        return Err(CliError::Usage(format!(
            "'{expr}' is not meromorphic; its spherical derivative is undefined"
        )));
    }
    let report = marty_scan(&expr, &resolved.scan_region, &resolved.scan_n_list)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    for row in &report.rows {
        match row.sup {
            Some(s) => println!(
                "n={} sup={:.15} argmax=({:.15},{:.15})",
                row.n, s, row.argmax_re, row.argmax_im
            ),
            None => println!("n={} sup=unavailable", row.n),
        }
    }
    match report.verdict {
        Some(v) => println!("verdict: {v:?}"),
        None => println!("verdict: unavailable (needs >= 5 values of n)"),
    }
    if let Some(dir) = out_dir(overrides, &resolved) {
        write_report(&dir, &format!("{}-scan.csv", resolved.name), &report.to_csv())?;
        write_report(
            &dir,
            &format!("{}-grid.csv", resolved.name),
            &report.grid_to_csv(),
        )?;
        write_report(&dir, &format!("{}-scan.json", resolved.name), &report.to_json())?;
    }
    check_degradation(&report)
}

fn parse_zstar_list(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').collect();
            match parts.as_slice() {
                [re, im] => {
                    let re: f64 = re.trim().parse().map_err(|_| ())?;
                    let im: f64 = im.trim().parse().map_err(|_| ())?;
                    Ok(Complex64::new(re, im))
                }
                _ => Err(()),
            }
        })
        .collect::<Result<Vec<_>, ()>>()
        .map_err(|_| {
            CliError::Usage(format!(
                "--zstar-list expects 're,im' pairs separated by ';', got '{text}'"
            ))
        })
}

fn cmd_rescale(
    name: &str,
    j0: Option<usize>,
    zstar_list: Option<&str>,
    probe_radius: Option<f64>,
    overrides: &Overrides,
) -> Result<(), CliError> {
    let mut resolved = resolve(name)?;
    apply_overrides(&mut resolved, overrides)?;
    if let Some(text) = zstar_list {
        resolved.rescale_zstar =
            normlab_core::ZStarSource::Explicit(parse_zstar_list(text)?);
    }
    let input = resolved.rescaling_input(j0)?;
    let sequence = run_sequence(&input).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut verifications = Vec::with_capacity(sequence.steps.len());
    let mut all_passed = true;
    println!("n        r              M              rho            R              checks");
    for step in &sequence.steps {
        let v = verify_step(&input, step).map_err(|e| CliError::Usage(e.to_string()))?;
        let status: String = v
            .checks
            .iter()
            .map(|c| if c.passed { '+' } else { '-' })
            .collect();
        println!(
            "{:<8} {:<14.8} {:<14.8} {:<14.8e} {:<14.8} {}",
            step.n, step.r, step.m, step.rho, step.big_r, status
        );
        all_passed &= v.all_passed;
        verifications.push(v);
    }
    println!(
        "trend: rm_increasing={} rm_growth={:.6} rho_strictly_decreasing={} big_r_strictly_increasing={}",
        sequence.trend.rm_increasing,
        sequence.trend.rm_growth,
        sequence.trend.rho_strictly_decreasing,
        sequence.trend.big_r_strictly_increasing
    );

    let radius = probe_radius.unwrap_or(resolved.probe_radius);
    let probe = limit_probe(&input, &sequence.steps, radius)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    for c in &probe.components {
        println!("component {}: {:?}", c.j, c.class);
    }

    if let Some(dir) = out_dir(overrides, &resolved) {
        write_report(
            &dir,
            &format!("{}-steps.json", resolved.name),
            &sequence.to_json(),
        )?;
        let verify_json = serde_json::to_string_pretty(&verifications)
            .expect("report serialization cannot fail");
        write_report(&dir, &format!("{}-verify.json", resolved.name), &verify_json)?;
        let mut grids = String::new();
        for v in &verifications {
            let _ = writeln!(grids, "# n = {}", v.n);
            grids.push_str(&v.grid_to_csv());
        }
        write_report(&dir, &format!("{}-gsharp.csv", resolved.name), &grids)?;
        write_report(
            &dir,
            &format!("{}-probe.json", resolved.name),
            &probe.to_json(),
        )?;
    }

    if !all_passed {
        return Err(CliError::Verification(
            "at least one rescaling verification check failed".into(),
        ));
    }
    Ok(())
}

fn cmd_separation(name: &str, overrides: &Overrides) -> Result<(), CliError> {
    let mut resolved = resolve(name)?;
    apply_overrides(&mut resolved, overrides)?;
    let scenario = resolved.scenario.as_ref().ok_or_else(|| {
        CliError::Usage(format!("'{name}' defines no omitted functions a, b, c"))
    })?;
    let mut csv = String::from("n,min,argmin_re,argmin_im,holds\n");
    for &n in &scenario.n_list {
        let row = min_separation(scenario, n).map_err(|e| match e {
            normlab_core::CaraError::MinUnreliable { .. } => {
                CliError::Degraded(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        })?;
        println!(
            "n={} min={:.15} argmin=({:.15},{:.15}) holds={}",
            row.n, row.min, row.argmin_re, row.argmin_im, row.holds
        );
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.n, row.min, row.argmin_re, row.argmin_im, row.holds
        );
    }
    println!("epsilon = {:.15}", scenario.epsilon);
    if let Some(dir) = out_dir(overrides, &resolved) {
        write_report(&dir, &format!("{}-separation.csv", resolved.name), &csv)?;
    }
    Ok(())
}

fn cmd_crossratio(name: &str) -> Result<(), CliError> {
    let resolved = resolve(name)?;
    let scenario = resolved.scenario.as_ref().ok_or_else(|| {
        CliError::Usage(format!("'{name}' defines no omitted functions a, b, c"))
    })?;
    let cr = cross_ratio(&scenario.f, &scenario.a, &scenario.b, &scenario.c);
    println!("{cr}");
    Ok(())
}

fn cmd_scenario_run(name: &str, overrides: &Overrides) -> Result<(), CliError> {
    let mut resolved = resolve(name)?;
    apply_overrides(&mut resolved, overrides)?;
    match resolved.scenario.clone() {
        Some(scenario) => {
            let report =
                scenario_check(&scenario).map_err(|e| CliError::Usage(e.to_string()))?;
            println!("scenario: {}", report.name);
            println!("separation_holds: {}", report.separation_holds);
            println!("omission_holds: {}", report.omission_holds);
            println!(
                "meromorphic: a={} b={} c={}",
                report.a_meromorphic, report.b_meromorphic, report.c_meromorphic
            );
            println!("verdict: {:?}", report.verdict);
            println!("theorem_tension: {}", report.theorem_tension);
            if let Some(dir) = out_dir(overrides, &resolved) {
                write_report(
                    &dir,
                    &format!("{}-scenario.json", resolved.name),
                    &report.to_json(),
                )?;
            }
            Ok(())
        }
        None => {
            // no omitted functions: report the scan evidence instead
            println!("scenario: {} (no omitted functions; scan only)", resolved.name);
            let report =
                marty_scan(&resolved.scan_family, &resolved.scan_region, &resolved.scan_n_list)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
            println!("verdict: {:?}", report.verdict);
            if let Some(dir) = out_dir(overrides, &resolved) {
                write_report(
                    &dir,
                    &format!("{}-scan.json", resolved.name),
                    &report.to_json(),
                )?;
            }
            check_degradation(&report)
        }
    }
}
