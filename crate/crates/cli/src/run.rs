//! Executes a scenario: builds the surface at every sweep point, resolves
//! the reference subspace and metric, evaluates each check in declaration
//! order, writes one JSON and one CSV report per scenario, and turns the
//! check verdicts into the process exit status.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use otiso::geometry::{
    alpha_n1, catalog, haar_plane_sample, sample_immersion, SampledImmersion, Subspace,
};
use otiso::inequalities::{
    classical_isoperimetric, lp_sobolev, sobolev_constant, weighted_isoperimetric,
    weighted_sobolev_l1, InequalityReport, TestFunction, DEFAULT_COLLAR,
};
use otiso::measures::{certify_monotone, CyclePolicy, DiscreteMeasure};
use otiso::transport::{composed_solution, projection_plan, solve_exact};
use otiso::warped::{
    warped_geometry, warped_lp_sobolev, warped_weighted_isoperimetric, WarpedImmersion,
    WarpedMetric,
};

use crate::config::{
    CheckSpec, CliError, MetricSpec, ScenarioConfig, SubspaceSpec, OUTPUT_DIR_VAR, SCHEMA_VERSION,
};

/// Quadrature order for the plane-average constant in codimension one.
const ALPHA_ORDER: usize = 256;
/// Panel count for the sharp Sobolev constant profile optimisation.
const SOBOLEV_GRID: usize = 24;
/// Orthogonality budget for the two-stage transport split.
const PYTHAGORAS_TOL: f64 = 1e-12;

#[derive(Serialize)]
struct ScenarioReport<'a> {
    schema_version: u32,
    scenario: &'a str,
    checks: &'a [CheckOutcome],
}

#[derive(Serialize)]
pub struct CheckOutcome {
    check: String,
    passed: bool,
    tolerance: f64,
    two_sided: bool,
    report: InequalityReport,
}

/// Runs every check of `config` and writes the reports. Returns `Ok` only
/// when all checks pass; the error lists the offenders.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(), CliError> {
    let out_dir = output_dir(config);
    std::fs::create_dir_all(&out_dir)?;

    let mut outcomes = Vec::new();
    for (params, resolution) in sweep_points(config) {
        outcomes.extend(evaluate_point(config, &params, &resolution)?);
    }

    let json_path = out_dir.join(format!("{}.json", config.name));
    let csv_path = out_dir.join(format!("{}.csv", config.name));
    write_reports(config, &outcomes, &json_path, &csv_path)?;

    let mut failures = Vec::new();
    for outcome in &outcomes {
        let r = &outcome.report;
        let verdict = if outcome.passed { "ok  " } else { "FAIL" };
        println!(
            "{verdict} {:<28} surface={} res={} relative_margin={:+.3e} tolerance={:.1e}",
            outcome.check,
            r.surface,
            r.resolution
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join("x"),
            r.relative_margin,
            outcome.tolerance,
        );
        if !outcome.passed {
            failures.push(format!(
                "{} on {} at resolution {:?}: relative margin {:+.6e} vs tolerance {:.1e}{}",
                outcome.check,
                r.surface,
                r.resolution,
                r.relative_margin,
                outcome.tolerance,
                if outcome.two_sided { " (two-sided)" } else { "" },
            ));
        }
    }
    println!(
        "reports: {} and {}",
        json_path.display(),
        csv_path.display()
    );

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Checks(failures))
    }
}

fn output_dir(config: &ScenarioConfig) -> PathBuf {
    match std::env::var(OUTPUT_DIR_VAR) {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(&config.output.dir),
    }
}

fn sweep_points(config: &ScenarioConfig) -> Vec<(BTreeMap<String, f64>, Vec<usize>)> {
    let base_params = config.surface.params.clone();
    let base_resolution = config.surface.resolution.clone();
    match &config.sweep {
        None => vec![(base_params, base_resolution)],
        Some(sweep) => {
            if let Some(resolutions) = &sweep.resolutions {
                resolutions
                    .iter()
                    .map(|r| (base_params.clone(), r.clone()))
                    .collect()
            } else if let Some(parameter) = &sweep.parameter {
                parameter
                    .values
                    .iter()
                    .map(|&v| {
                        let mut params = base_params.clone();
                        params.insert(parameter.param.clone(), v);
                        (params, base_resolution.clone())
                    })
                    .collect()
            } else {
                vec![(base_params, base_resolution)]
            }
        }
    }
}

/// The surface at one sweep point, under either metric.
enum Sampled {
    Euclidean(SampledImmersion),
    Warped(WarpedImmersion),
}

impl Sampled {
    fn base(&self) -> &SampledImmersion {
        match self {
            Sampled::Euclidean(m) => m,
            Sampled::Warped(m) => m.base(),
        }
    }
}

fn evaluate_point(
    config: &ScenarioConfig,
    params: &BTreeMap<String, f64>,
    resolution: &[usize],
) -> Result<Vec<CheckOutcome>, CliError> {
    let overrides: Vec<(&str, f64)> = params.iter().map(|(k, &v)| (k.as_str(), v)).collect();
    let chart = catalog::build(&config.surface.id, &overrides, resolution)?;

    let sampled = match build_metric(&config.metric)? {
        None => Sampled::Euclidean(sample_immersion(&chart)?),
        Some(metric) => Sampled::Warped(warped_geometry(&chart, &metric)?),
    };
    let subspace = resolve_subspace(&config.subspace, &sampled)?;

    config
        .checks
        .iter()
        .map(|check| evaluate_check(config, check, &sampled, &subspace))
        .collect()
}

fn build_metric(spec: &MetricSpec) -> Result<Option<WarpedMetric>, CliError> {
    match spec {
        MetricSpec::Euclidean => Ok(None),
        MetricSpec::Warped { preset, table } => {
            let metric = match preset.as_str() {
                "euclidean" => WarpedMetric::euclidean(),
                "hyperbolic" => WarpedMetric::hyperbolic(),
                "table" => {
                    let path = table.as_deref().expect("validated");
                    WarpedMetric::from_table(&read_warp_table(path)?)?
                }
                other => {
                    return Err(CliError::usage(format!("unknown warp preset `{other}`")));
                }
            };
            Ok(Some(metric))
        }
    }
}

/// Reads `t,w,w_prime` rows; a single non-numeric first line is treated as
/// a header.
fn read_warp_table(path: &str) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("warp table `{path}`: {e}")))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed {
            Some(values) if values.len() == 3 => rows.push((values[0], values[1], values[2])),
            _ if lineno == 0 => continue, // header row
            _ => {
                return Err(CliError::usage(format!(
                    "warp table `{path}` line {}: expected three comma-separated numbers, got `{line}`",
                    lineno + 1
                )));
            }
        }
    }
    Ok(rows)
}

fn resolve_subspace(spec: &SubspaceSpec, sampled: &Sampled) -> Result<Subspace, CliError> {
    let base = sampled.base();
    // Under a warped metric the reference subspace lives in the fibre,
    // which has one coordinate fewer than the ambient space.
    let ambient = match sampled {
        Sampled::Euclidean(_) => base.ambient_dim,
        Sampled::Warped(_) => base.ambient_dim - 1,
    };
    match spec {
        SubspaceSpec::Explicit { basis } => {
            let vectors: Vec<DVector<f64>> = basis
                .iter()
                .map(|row| DVector::from_column_slice(row))
                .collect();
            if vectors.iter().any(|v| v.len() != ambient) {
                return Err(CliError::usage(format!(
                    "subspace basis vectors must have {ambient} components \
                     (fibre components under a warped metric)"
                )));
            }
            Ok(Subspace::spanned_by(&vectors)?)
        }
        SubspaceSpec::Haar { seed } => {
            Ok(haar_plane_sample(ambient, base.intrinsic_dim, *seed)?)
        }
        SubspaceSpec::TangentAt { point } => {
            if matches!(sampled, Sampled::Warped(_)) {
                return Err(CliError::usage(
                    "tangent-at subspaces are defined for the Euclidean metric only",
                ));
            }
            if point.len() != ambient {
                return Err(CliError::usage(format!(
                    "tangent-at point must have {ambient} components"
                )));
            }
            let target = DVector::from_column_slice(point);
            let nearest = base
                .points
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - &target)
                        .norm()
                        .partial_cmp(&(*b - &target).norm())
                        .expect("finite point norms")
                })
                .map(|(i, _)| i)
                .ok_or_else(|| CliError::usage("surface has no sample nodes"))?;
            Ok(Subspace::new(base.frames[nearest].clone())?)
        }
    }
}

fn evaluate_check(
    config: &ScenarioConfig,
    check: &CheckSpec,
    sampled: &Sampled,
    subspace: &Subspace,
) -> Result<CheckOutcome, CliError> {
    let report = match (check.check.as_str(), sampled) {
        ("weighted-isoperimetric", Sampled::Euclidean(m)) => weighted_isoperimetric(m, subspace)?,
        ("weighted-isoperimetric", Sampled::Warped(m)) => {
            warped_weighted_isoperimetric(m, subspace)?
        }
        ("weighted-sobolev-l1", Sampled::Euclidean(m)) => {
            let u = TestFunction::chart_bump(m, check.collar.unwrap_or(DEFAULT_COLLAR))?;
            weighted_sobolev_l1(m, subspace, &u)?
        }
        ("classical-isoperimetric", Sampled::Euclidean(m)) => {
            let (n, k) = (m.intrinsic_dim, m.ambient_dim - m.intrinsic_dim);
            if k != 1 {
                return Err(CliError::usage(format!(
                    "classical-isoperimetric uses the codimension-one plane average; \
                     this surface has codimension {k}"
                )));
            }
            classical_isoperimetric(m, alpha_n1(n, ALPHA_ORDER)?)?
        }
        ("lp-sobolev", Sampled::Euclidean(m)) => {
            let p = check.p.expect("validated");
            let u = TestFunction::chart_bump(m, check.collar.unwrap_or(DEFAULT_COLLAR))?;
            lp_sobolev(m, subspace, &u, p, sobolev_constant(m.intrinsic_dim, p, SOBOLEV_GRID)?)?
        }
        ("lp-sobolev", Sampled::Warped(m)) => {
            let p = check.p.expect("validated");
            let u = TestFunction::chart_bump(m.base(), check.collar.unwrap_or(DEFAULT_COLLAR))?;
            warped_lp_sobolev(
                m,
                subspace,
                &u,
                p,
                sobolev_constant(m.intrinsic_dim(), p, SOBOLEV_GRID)?,
            )?
        }
        ("projection-optimality", Sampled::Euclidean(m)) => {
            return projection_check(config, check, m, subspace);
        }
        ("composition-optimality", Sampled::Euclidean(m)) => {
            return composition_check(config, check, m, subspace);
        }
        (
            "weighted-sobolev-l1" | "classical-isoperimetric" | "projection-optimality"
            | "composition-optimality",
            Sampled::Warped(_),
        ) => {
            return Err(CliError::usage(format!(
                "check `{}` supports the Euclidean metric only",
                check.check
            )));
        }
        (other, _) => {
            return Err(CliError::usage(format!(
                "unknown check `{other}` (weighted-isoperimetric, weighted-sobolev-l1, \
                 classical-isoperimetric, lp-sobolev, projection-optimality, \
                 composition-optimality)"
            )));
        }
    };

    let passed = if check.two_sided {
        report.relative_margin.abs() <= check.tolerance
    } else {
        report.relative_margin >= -check.tolerance
    };
    Ok(CheckOutcome {
        check: check.check.clone(),
        passed,
        tolerance: check.tolerance,
        two_sided: check.two_sided,
        report,
    })
}

/// Seed for instance `i`, decorrelated with a 64-bit mix.
fn instance_seed(base: u64, i: u64) -> u64 {
    base.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Per-instance subspace: Haar configs redraw a fresh plane per instance,
/// explicit and tangent configs keep the resolved one.
fn instance_subspace(
    config: &ScenarioConfig,
    resolved: &Subspace,
    m: &SampledImmersion,
    instance: u64,
) -> Result<Subspace, CliError> {
    match &config.subspace {
        SubspaceSpec::Haar { seed } => Ok(haar_plane_sample(
            m.ambient_dim,
            m.intrinsic_dim,
            instance_seed(*seed, instance),
        )?),
        _ => Ok(resolved.clone()),
    }
}

/// Random measure supported on a subsample of the surface nodes.
fn surface_subsample(m: &SampledImmersion, rng: &mut ChaCha8Rng) -> Result<DiscreteMeasure, CliError> {
    let max_atoms = m.points.len().min(150);
    let count = rng.random_range(20..=max_atoms.max(20)).min(m.points.len());
    let mut indices: Vec<usize> = (0..m.points.len()).collect();
    for i in 0..count {
        let j = rng.random_range(i..indices.len());
        indices.swap(i, j);
    }
    indices.truncate(count);
    let points = indices.iter().map(|&i| m.points[i].clone()).collect();
    let masses = indices.iter().map(|&i| m.weights[i]).collect();
    Ok(DiscreteMeasure::new(points, masses)?.normalized())
}

/// Random probability measure supported in the subspace's unit cube.
fn subspace_target(e: &Subspace, rng: &mut ChaCha8Rng) -> Result<DiscreteMeasure, CliError> {
    let atoms = rng.random_range(10..=80);
    let points = (0..atoms)
        .map(|_| {
            let coords =
                DVector::from_fn(e.dim(), |_, _| rng.random_range(-1.0..1.0));
            e.embed(&coords)
        })
        .collect::<Vec<_>>();
    let masses = (0..atoms).map(|_| rng.random_range(0.2..1.0)).collect();
    Ok(DiscreteMeasure::new(points, masses)?.normalized())
}

/// Random probability measure in the ambient unit cube (off the subspace).
fn ambient_measure(dim: usize, rng: &mut ChaCha8Rng) -> Result<DiscreteMeasure, CliError> {
    let atoms = rng.random_range(20..=150);
    let points = (0..atoms)
        .map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)))
        .collect::<Vec<_>>();
    let masses = (0..atoms).map(|_| rng.random_range(0.2..1.0)).collect();
    Ok(DiscreteMeasure::new(points, masses)?.normalized())
}

/// Checks that projecting onto the subspace is itself an optimal transport:
/// the deterministic projection plan must match the exact solver's cost and
/// carry a cyclically monotone support.
fn projection_check(
    config: &ScenarioConfig,
    check: &CheckSpec,
    m: &SampledImmersion,
    resolved: &Subspace,
) -> Result<CheckOutcome, CliError> {
    let instances = check.instances.unwrap_or(100);
    let seed = check.seed.expect("validated");
    let mut worst_gap = 0.0f64;
    let mut worst = None;
    let mut monotone_failures = 0usize;

    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(seed, i as u64));
        let e = instance_subspace(config, resolved, m, i as u64)?;
        let mu = ambient_measure(m.ambient_dim, &mut rng)?;
        let (projected, plan) = projection_plan(&mu, &e)?;
        let exact = solve_exact(&mu, &projected, CyclePolicy::Auto)?;
        let scale = exact.report.cost.max(1e-12);
        let gap = (plan.cost() - exact.report.cost).abs() / scale;
        if !certify_monotone(&plan, CyclePolicy::Auto).monotone {
            monotone_failures += 1;
        }
        if gap >= worst_gap {
            worst_gap = gap;
            worst = Some((plan.cost(), exact.report.cost));
        }
    }

    let (lhs, rhs) = worst.expect("at least one instance");
    let mut constants = BTreeMap::new();
    constants.insert("instances".into(), instances as f64);
    constants.insert("worst_relative_gap".into(), worst_gap);
    constants.insert("monotone_failures".into(), monotone_failures as f64);
    let report = InequalityReport::new(
        "projection-optimality",
        lhs,
        rhs.max(1e-12),
        &m.info,
        constants,
        Vec::new(),
    )?;
    let passed = worst_gap <= check.tolerance && monotone_failures == 0;
    Ok(CheckOutcome {
        check: check.check.clone(),
        passed,
        tolerance: check.tolerance,
        two_sided: check.two_sided,
        report,
    })
}

/// Checks the two-stage construction: project the surface measure onto the
/// subspace, transport inside it, and compare the composed plan's cost with
/// a direct exact solve. The costs must agree, the split must be
/// orthogonal, and the inner plan cyclically monotone.
fn composition_check(
    config: &ScenarioConfig,
    check: &CheckSpec,
    m: &SampledImmersion,
    resolved: &Subspace,
) -> Result<CheckOutcome, CliError> {
    let instances = check.instances.unwrap_or(100);
    let seed = check.seed.expect("validated");
    let mut worst_gap = 0.0f64;
    let mut worst = None;
    let mut pythagoras_worst = 0.0f64;
    let mut monotone_failures = 0usize;

    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(seed, i as u64));
        let e = instance_subspace(config, resolved, m, i as u64)?;
        let mu = surface_subsample(m, &mut rng)?;
        let nu = subspace_target(&e, &mut rng)?;
        let composed = composed_solution(&mu, &e, &nu, CyclePolicy::Auto)?;
        let direct = solve_exact(&mu, &nu, CyclePolicy::Auto)?;
        let scale = direct.report.cost.max(1e-12);
        let gap = (composed.total_cost - direct.report.cost).abs() / scale;
        pythagoras_worst = pythagoras_worst
            .max(composed.pythagoras_residual.abs() / composed.total_cost.max(1.0));
        if !certify_monotone(&composed.inner.plan, CyclePolicy::Auto).monotone {
            monotone_failures += 1;
        }
        if gap >= worst_gap {
            worst_gap = gap;
            worst = Some((composed.total_cost, direct.report.cost));
        }
    }

    let (lhs, rhs) = worst.expect("at least one instance");
    let mut constants = BTreeMap::new();
    constants.insert("instances".into(), instances as f64);
    constants.insert("worst_relative_gap".into(), worst_gap);
    constants.insert("pythagoras_worst".into(), pythagoras_worst);
    constants.insert("monotone_failures".into(), monotone_failures as f64);
    let report = InequalityReport::new(
        "composition-optimality",
        lhs,
        rhs.max(1e-12),
        &m.info,
        constants,
        Vec::new(),
    )?;
    let passed =
        worst_gap <= check.tolerance && pythagoras_worst <= PYTHAGORAS_TOL && monotone_failures == 0;
    Ok(CheckOutcome {
        check: check.check.clone(),
        passed,
        tolerance: check.tolerance,
        two_sided: check.two_sided,
        report,
    })
}

fn write_reports(
    config: &ScenarioConfig,
    outcomes: &[CheckOutcome],
    json_path: &Path,
    csv_path: &Path,
) -> Result<(), CliError> {
    let document = ScenarioReport {
        schema_version: SCHEMA_VERSION,
        scenario: &config.name,
        checks: outcomes,
    };
    let json = serde_json::to_string_pretty(&document)
        .map_err(|e| CliError::usage(format!("report serialisation: {e}")))?;
    std::fs::write(json_path, json + "\n")?;

    let mut csv = String::from(InequalityReport::csv_header());
    csv.push('\n');
    for outcome in outcomes {
        csv.push_str(&outcome.report.csv_row());
        csv.push('\n');
    }
    std::fs::write(csv_path, csv)?;
    Ok(())
}
