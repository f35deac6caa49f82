//! Scenario configuration: a versioned JSON document describing one surface,
//! one reference subspace, a metric, and a list of checks to run against
//! them. Seeds are explicit everywhere a random draw happens, so rerunning a
//! config reproduces its reports byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;

/// Schema version this binary reads.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_VAR: &str = "OTISO_OUTPUT_DIR";

/// Errors are split by exit code: configuration/usage problems exit 2,
/// failed checks exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Checks(Vec<String>),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Checks(_) => 1,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Checks(failed) => {
                writeln!(f, "{} check(s) failed:", failed.len())?;
                for line in failed {
                    writeln!(f, "  - {line}")?;
                }
                Ok(())
            }
        }
    }
}

impl From<otiso::Error> for CliError {
    fn from(e: otiso::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    pub surface: SurfaceSpec,
    pub subspace: SubspaceSpec,
    #[serde(default)]
    pub metric: MetricSpec,
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    /// Catalog id (`catalog` subcommand lists them).
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Grid cells per chart axis.
    pub resolution: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SubspaceSpec {
    /// Explicit spanning vectors (rows), orthonormalised if needed.
    Explicit { basis: Vec<Vec<f64>> },
    /// Haar-random plane of the surface's intrinsic dimension.
    Haar { seed: u64 },
    /// Tangent plane of the surface at the sampled node nearest this
    /// ambient point.
    TangentAt { point: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    #[default]
    Euclidean,
    /// Warped product `dt^2 + w(t)^2 dy^2` over the first ambient
    /// coordinate. Presets: `euclidean` (w = 1), `hyperbolic` (w = e^t), or
    /// `table` with a CSV of `t,w,w_prime` rows.
    Warped {
        preset: String,
        #[serde(default)]
        table: Option<String>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// One of: `weighted-isoperimetric`, `weighted-sobolev-l1`,
    /// `classical-isoperimetric`, `lp-sobolev`, `projection-optimality`,
    /// `composition-optimality`.
    pub check: String,
    /// Pass threshold on the relative margin (one-sided by default).
    pub tolerance: f64,
    /// Require `|relative margin| <= tolerance` instead of
    /// `relative margin >= -tolerance` (equality cases).
    #[serde(default)]
    pub two_sided: bool,
    /// Sobolev exponent (`lp-sobolev` only).
    #[serde(default)]
    pub p: Option<f64>,
    /// Test-function collar width as a fraction of each chart axis.
    #[serde(default)]
    pub collar: Option<f64>,
    /// Number of random instances (transport checks).
    #[serde(default)]
    pub instances: Option<usize>,
    /// Seed for any random draw inside the check (mandatory there).
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Re-run every check at each of these resolutions.
    #[serde(default)]
    pub resolutions: Option<Vec<Vec<usize>>>,
    /// Re-run every check with this surface parameter set to each value.
    #[serde(default)]
    pub parameter: Option<ParameterSweep>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSweep {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for the JSON and CSV reports (created if missing);
    /// overridden by the `OTISO_OUTPUT_DIR` environment variable.
    #[serde(default = "default_output_dir")]
    pub dir: String,
}

fn default_output_dir() -> String {
    "reports".to_owned()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_output_dir(),
        }
    }
}

/// Flat-disc equality case: the margin must vanish up to discretisation.
pub const EQUALITY_CASE: &str = r#"{
  "schema_version": 1,
  "name": "equality-case",
  "surface": { "id": "flat-disc", "params": {}, "resolution": [192, 192] },
  "subspace": { "kind": "explicit", "basis": [[1, 0, 0], [0, 1, 0]] },
  "metric": { "kind": "euclidean" },
  "checks": [
    { "check": "weighted-isoperimetric", "tolerance": 1e-2, "two_sided": true }
  ]
}"#;

/// Project-transport-compose optimality on 100 random instances.
pub const COMPOSITION_OPTIMALITY: &str = r#"{
  "schema_version": 1,
  "name": "composition-optimality",
  "surface": { "id": "sphere-cap", "params": { "theta_max": 1.3 }, "resolution": [10, 10] },
  "subspace": { "kind": "haar", "seed": 2716057 },
  "metric": { "kind": "euclidean" },
  "checks": [
    { "check": "composition-optimality", "tolerance": 1e-9, "instances": 100, "seed": 8675309 }
  ]
}"#;

pub const BUNDLED: &[(&str, &str)] = &[
    ("equality-case", EQUALITY_CASE),
    ("composition-optimality", COMPOSITION_OPTIMALITY),
];

/// Loads a scenario from a file path or a bundled scenario name.
pub fn load_scenario(arg: &str) -> Result<ScenarioConfig, CliError> {
    let text = if Path::new(arg).exists() {
        std::fs::read_to_string(arg)?
    } else if let Some((_, body)) = BUNDLED.iter().find(|(name, _)| *name == arg) {
        (*body).to_owned()
    } else {
        let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
        return Err(CliError::usage(format!(
            "`{arg}` is neither a config file nor a bundled scenario (bundled: {})",
            names.join(", ")
        )));
    };
    let config: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config parse error at line {}, column {}: {e}", e.line(), e.column())))?;
    validate(&config)?;
    Ok(config)
}

fn validate(config: &ScenarioConfig) -> Result<(), CliError> {
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::usage(format!(
            "unsupported schema_version {} (this binary reads {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    if config.name.is_empty()
        || !config
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err(CliError::usage(
            "scenario name must be non-empty and use only [A-Za-z0-9-_] (it names the report files)",
        ));
    }
    if otiso::geometry::catalog::entries()
        .iter()
        .all(|e| e.id != config.surface.id)
    {
        return Err(CliError::usage(format!(
            "unknown surface `{}`; run the catalog subcommand for the list",
            config.surface.id
        )));
    }
    if config.checks.is_empty() {
        return Err(CliError::usage("scenario has no checks"));
    }
    for check in &config.checks {
        if !(check.tolerance.is_finite() && check.tolerance > 0.0) {
            return Err(CliError::usage(format!(
                "check `{}`: tolerance must be positive and finite, got {}",
                check.check, check.tolerance
            )));
        }
        let transport = matches!(
            check.check.as_str(),
            "projection-optimality" | "composition-optimality"
        );
        if transport && check.seed.is_none() {
            return Err(CliError::usage(format!(
                "check `{}` draws random instances and needs an explicit `seed`",
                check.check
            )));
        }
        if transport && check.instances == Some(0) {
            return Err(CliError::usage(format!(
                "check `{}` needs at least one instance",
                check.check
            )));
        }
        if check.check == "lp-sobolev" && check.p.is_none() {
            return Err(CliError::usage("check `lp-sobolev` needs an exponent `p`"));
        }
    }
    if let Some(sweep) = &config.sweep {
        if sweep.resolutions.is_some() && sweep.parameter.is_some() {
            return Err(CliError::usage(
                "sweep over resolutions and over a parameter are mutually exclusive",
            ));
        }
        if let Some(resolutions) = &sweep.resolutions {
            if resolutions.is_empty() {
                return Err(CliError::usage("sweep.resolutions is empty"));
            }
        }
        if let Some(parameter) = &sweep.parameter {
            if parameter.values.is_empty() {
                return Err(CliError::usage("sweep.parameter.values is empty"));
            }
        }
    }
    if let MetricSpec::Warped { preset, table } = &config.metric {
        match preset.as_str() {
            "euclidean" | "hyperbolic" => {}
            "table" => {
                if table.is_none() {
                    return Err(CliError::usage(
                        "warped preset `table` needs a `table` CSV path with t,w,w_prime rows",
                    ));
                }
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown warp preset `{other}` (euclidean, hyperbolic, table)"
                )));
            }
        }
    }
    Ok(())
}
