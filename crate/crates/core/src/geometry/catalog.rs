//! Built-in surface catalog.
//!
//! Five chart families cover the geometric situations the inequality
//! evaluators care about: the flat equality case, positive and negative
//! curvature, a graph with controlled projection Jacobian, a minimal
//! surface, and a patch with two boundary circles. Every chart documents its
//! parameters with defaults; `build` merges overrides and records the full
//! parameter set in the chart's surface info, so reports are reproducible
//! from their metadata alone.
//!
//! `flat-disc`, `sphere-cap` and `graph` also exist in intrinsic dimension 3
//! (ambient dimension 4) via the `dim` parameter, for tests that need
//! exponents `p` with `1 < p < n` and `p = 2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::chart::{ParametricChart, SurfaceInfo};

/// One documented parameter of a catalog surface.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub doc: &'static str,
}

/// A catalog entry: id, one-line description, parameters.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
}

/// All built-in surfaces.
pub fn entries() -> &'static [CatalogEntry] {
    &[
        CatalogEntry {
            id: "flat-disc",
            summary: "round n-ball in a flat n-plane, optionally tilted out of the reference plane",
            params: &[
                ParamSpec { name: "radius", default: 1.0, doc: "disc radius (> 0)" },
                ParamSpec {
                    name: "tilt",
                    default: 0.0,
                    doc: "angle (radians) between the disc plane and the first-coordinates plane",
                },
                ParamSpec { name: "dim", default: 2.0, doc: "intrinsic dimension, 2 or 3" },
            ],
        },
        CatalogEntry {
            id: "sphere-cap",
            summary: "geodesic cap of a round n-sphere; theta_max = pi gives the closed sphere",
            params: &[
                ParamSpec { name: "radius", default: 1.0, doc: "sphere radius (> 0)" },
                ParamSpec {
                    name: "theta_max",
                    default: 1.0,
                    doc: "polar opening angle in (0, pi]; pi closes the sphere",
                },
                ParamSpec { name: "dim", default: 2.0, doc: "intrinsic dimension, 2 or 3" },
            ],
        },
        CatalogEntry {
            id: "graph",
            summary: "graph of amplitude*prod_i sin(frequency*u_i) over a centred n-cube",
            params: &[
                ParamSpec { name: "amplitude", default: 0.3, doc: "height scale (>= 0)" },
                ParamSpec { name: "frequency", default: 1.0, doc: "oscillation frequency (> 0)" },
                ParamSpec { name: "side", default: 2.0, doc: "edge length of the base cube (> 0)" },
                ParamSpec { name: "dim", default: 2.0, doc: "intrinsic dimension, 2 or 3" },
            ],
        },
        CatalogEntry {
            id: "catenoid",
            summary: "minimal surface of revolution (H = 0), cut at fixed height",
            params: &[
                ParamSpec { name: "waist", default: 1.0, doc: "neck radius (> 0)" },
                ParamSpec { name: "height", default: 1.0, doc: "half-height of the cut (> 0)" },
            ],
        },
        CatalogEntry {
            id: "torus-patch",
            summary: "angular sector of a torus of revolution; phi_max = 2 pi closes it",
            params: &[
                ParamSpec { name: "major_radius", default: 2.0, doc: "centre-line radius (> minor)" },
                ParamSpec { name: "minor_radius", default: 0.5, doc: "tube radius (> 0)" },
                ParamSpec {
                    name: "phi_max",
                    default: PI,
                    doc: "swept angle in (0, 2 pi]; 2 pi closes the torus",
                },
            ],
        },
    ]
}

fn entry(id: &str) -> Result<&'static CatalogEntry> {
    entries()
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownSurface(id.to_owned()))
}

fn merge_params(entry: &CatalogEntry, overrides: &[(&str, f64)]) -> Result<BTreeMap<String, f64>> {
    let mut params: BTreeMap<String, f64> = entry
        .params
        .iter()
        .map(|p| (p.name.to_owned(), p.default))
        .collect();
    for &(name, value) in overrides {
        if !params.contains_key(name) {
            return Err(Error::SurfaceParameter(format!(
                "`{}` has no parameter `{name}`",
                entry.id
            )));
        }
        if !value.is_finite() {
            return Err(Error::SurfaceParameter(format!("`{name}` must be finite")));
        }
        params.insert(name.to_owned(), value);
    }
    Ok(params)
}

fn require_dim(params: &BTreeMap<String, f64>) -> Result<usize> {
    let dim = params["dim"];
    if dim == 2.0 {
        Ok(2)
    } else if dim == 3.0 {
        Ok(3)
    } else {
        Err(Error::SurfaceParameter(format!(
            "`dim` must be 2 or 3, got {dim}"
        )))
    }
}

fn require_positive(params: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
    let v = params[name];
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::SurfaceParameter(format!("`{name}` must be positive, got {v}")))
    }
}

/// Builds a catalog chart. `resolution` must have one entry per intrinsic
/// dimension of the configured surface.
pub fn build(id: &str, overrides: &[(&str, f64)], resolution: &[usize]) -> Result<ParametricChart> {
    let entry = entry(id)?;
    let params = merge_params(entry, overrides)?;
    let mut chart = match entry.id {
        "flat-disc" => flat_disc(&params, resolution)?,
        "sphere-cap" => sphere_cap(&params, resolution)?,
        "graph" => graph(&params, resolution)?,
        "catenoid" => catenoid(&params, resolution)?,
        "torus-patch" => torus_patch(&params, resolution)?,
        _ => unreachable!("entry() filters unknown ids"),
    };
    chart.info = SurfaceInfo {
        id: entry.id.to_owned(),
        params,
        resolution: resolution.to_vec(),
    };
    Ok(chart)
}

fn flat_disc(params: &BTreeMap<String, f64>, resolution: &[usize]) -> Result<ParametricChart> {
    let radius = require_positive(params, "radius")?;
    let tilt = params["tilt"];
    let dim = require_dim(params)?;
    let (ct, st) = (tilt.cos(), tilt.sin());
    match dim {
        2 => ParametricChart::new(
            vec![(0.0, radius), (0.0, 2.0 * PI)],
            resolution.to_vec(),
            vec![false, true],
            3,
            Arc::new(move |u: &[f64]| {
                let (r, phi) = (u[0], u[1]);
                let (x, y) = (r * phi.cos(), r * phi.sin());
                vec![x, y * ct, y * st]
            }),
        ),
        _ => ParametricChart::new(
            vec![(0.0, radius), (0.0, PI), (0.0, 2.0 * PI)],
            resolution.to_vec(),
            vec![false, false, true],
            4,
            Arc::new(move |u: &[f64]| {
                let (r, theta, phi) = (u[0], u[1], u[2]);
                let z = r * theta.cos();
                vec![
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                    z * ct,
                    z * st,
                ]
            }),
        ),
    }
}

fn sphere_cap(params: &BTreeMap<String, f64>, resolution: &[usize]) -> Result<ParametricChart> {
    let radius = require_positive(params, "radius")?;
    let theta_max = params["theta_max"];
    if !(theta_max > 0.0 && theta_max <= PI) {
        return Err(Error::SurfaceParameter(format!(
            "`theta_max` must lie in (0, pi], got {theta_max}"
        )));
    }
    match require_dim(params)? {
        2 => ParametricChart::new(
            vec![(0.0, theta_max), (0.0, 2.0 * PI)],
            resolution.to_vec(),
            vec![false, true],
            3,
            Arc::new(move |u: &[f64]| {
                let (theta, phi) = (u[0], u[1]);
                vec![
                    radius * theta.cos(),
                    radius * theta.sin() * phi.cos(),
                    radius * theta.sin() * phi.sin(),
                ]
            }),
        ),
        _ => ParametricChart::new(
            vec![(0.0, theta_max), (0.0, PI), (0.0, 2.0 * PI)],
            resolution.to_vec(),
            vec![false, false, true],
            4,
            Arc::new(move |u: &[f64]| {
                let (psi, theta, phi) = (u[0], u[1], u[2]);
                vec![
                    radius * psi.cos(),
                    radius * psi.sin() * theta.cos(),
                    radius * psi.sin() * theta.sin() * phi.cos(),
                    radius * psi.sin() * theta.sin() * phi.sin(),
                ]
            }),
        ),
    }
}

fn graph(params: &BTreeMap<String, f64>, resolution: &[usize]) -> Result<ParametricChart> {
    let amplitude = params["amplitude"];
    if amplitude < 0.0 {
        return Err(Error::SurfaceParameter("`amplitude` must be >= 0".into()));
    }
    let frequency = require_positive(params, "frequency")?;
    let side = require_positive(params, "side")?;
    let dim = require_dim(params)?;
    let half = 0.5 * side;
    let domain = vec![(-half, half); dim];
    ParametricChart::new(
        domain,
        resolution.to_vec(),
        vec![false; dim],
        dim + 1,
        Arc::new(move |u: &[f64]| {
            let mut x: Vec<f64> = u.to_vec();
            let height = amplitude
                * u.iter()
                    .map(|&ui| (frequency * ui).sin())
                    .product::<f64>();
            x.push(height);
            x
        }),
    )
}

fn catenoid(params: &BTreeMap<String, f64>, resolution: &[usize]) -> Result<ParametricChart> {
    let waist = require_positive(params, "waist")?;
    let height = require_positive(params, "height")?;
    ParametricChart::new(
        vec![(0.0, 2.0 * PI), (-height, height)],
        resolution.to_vec(),
        vec![true, false],
        3,
        Arc::new(move |u: &[f64]| {
            let (angle, v) = (u[0], u[1]);
            let rho = waist * (v / waist).cosh();
            vec![rho * angle.cos(), rho * angle.sin(), v]
        }),
    )
}

fn torus_patch(params: &BTreeMap<String, f64>, resolution: &[usize]) -> Result<ParametricChart> {
    let major = require_positive(params, "major_radius")?;
    let minor = require_positive(params, "minor_radius")?;
    if minor >= major {
        return Err(Error::SurfaceParameter(format!(
            "`minor_radius` {minor} must be smaller than `major_radius` {major}"
        )));
    }
    let phi_max = params["phi_max"];
    if !(phi_max > 0.0 && phi_max <= 2.0 * PI) {
        return Err(Error::SurfaceParameter(format!(
            "`phi_max` must lie in (0, 2 pi], got {phi_max}"
        )));
    }
    // A full sweep closes the torus: no boundary circles.
    let closed = (phi_max - 2.0 * PI).abs() < 1e-12;
    ParametricChart::new(
        vec![(0.0, 2.0 * PI), (0.0, phi_max)],
        resolution.to_vec(),
        vec![true, closed],
        3,
        Arc::new(move |u: &[f64]| {
            let (theta, phi) = (u[0], u[1]);
            let rho = major + minor * theta.cos();
            vec![rho * phi.cos(), rho * phi.sin(), minor * theta.sin()]
        }),
    )
}
