//! Parametric charts on axis-aligned boxes, with the finite-difference
//! stencils used to turn them into sampled geometry.
//!
//! A chart is a smooth map from a box in `R^n` into `R^d` together with a
//! per-axis resolution. Sampling places one node at the centre of every grid
//! cell (midpoint quadrature), and all stencils use the step `h/4`, so their
//! widest points (`+/- h/2`) stay inside the closed box. First partials use
//! the five-point fourth-order stencil: the induced metric — and with it
//! every quadrature weight — then carries only an `O(h^4)` bias, which keeps
//! discretisation error out of the signed margins the inequality evaluators
//! report. Second partials use the standard second-order stencils; they feed
//! curvature terms where `O(h^2)` suffices. Periodic axes carry no boundary
//! faces; the map itself is expected to be periodic there.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identification attached to sampled geometry: which surface this is, with
/// which parameters, at which grid resolution. Reports carry it verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceInfo {
    pub id: String,
    pub params: BTreeMap<String, f64>,
    pub resolution: Vec<usize>,
}

impl SurfaceInfo {
    pub fn custom(resolution: &[usize]) -> Self {
        Self {
            id: "custom".to_owned(),
            params: BTreeMap::new(),
            resolution: resolution.to_vec(),
        }
    }
}

/// The map of a chart: parameters (length `intrinsic_dim`) to ambient
/// coordinates (length `ambient_dim`).
pub type ChartMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A parametric chart over an axis-aligned box, plus sampling resolution.
#[derive(Clone)]
pub struct ParametricChart {
    intrinsic_dim: usize,
    ambient_dim: usize,
    domain: Vec<(f64, f64)>,
    resolution: Vec<usize>,
    periodic: Vec<bool>,
    map: ChartMap,
    pub info: SurfaceInfo,
}

impl std::fmt::Debug for ParametricChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametricChart")
            .field("intrinsic_dim", &self.intrinsic_dim)
            .field("ambient_dim", &self.ambient_dim)
            .field("domain", &self.domain)
            .field("resolution", &self.resolution)
            .field("periodic", &self.periodic)
            .field("info", &self.info)
            .finish()
    }
}

impl ParametricChart {
    /// Builds a chart, checking that the box, resolution and periodicity have
    /// matching lengths and that the map produces finite ambient vectors of
    /// the declared dimension (probed at the box centre).
    pub fn new(
        domain: Vec<(f64, f64)>,
        resolution: Vec<usize>,
        periodic: Vec<bool>,
        ambient_dim: usize,
        map: ChartMap,
    ) -> Result<Self> {
        let n = domain.len();
        if n == 0 {
            return Err(Error::ChartDimensions("empty parameter domain".into()));
        }
        if resolution.len() != n || periodic.len() != n {
            return Err(Error::ChartDimensions(format!(
                "domain has {n} axes but resolution has {} and periodicity {}",
                resolution.len(),
                periodic.len()
            )));
        }
        for (axis, &(lo, hi)) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::ChartDimensions(format!(
                    "axis {axis} has an empty or non-finite range [{lo}, {hi}]"
                )));
            }
        }
        if resolution.iter().any(|&r| r == 0) {
            return Err(Error::ChartDimensions("resolution must be positive".into()));
        }
        let chart = Self {
            intrinsic_dim: n,
            ambient_dim,
            domain,
            resolution: resolution.clone(),
            periodic,
            map,
            info: SurfaceInfo::custom(&resolution),
        };
        let centre: Vec<f64> = chart.domain.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
        let probe = (chart.map)(&centre);
        if probe.len() != ambient_dim {
            return Err(Error::ChartDimensions(format!(
                "map returns {} coordinates, expected ambient dimension {ambient_dim}",
                probe.len()
            )));
        }
        chart.eval(&centre)?;
        Ok(chart)
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    /// Returns a copy with a different per-axis resolution (for refinement
    /// studies). The surface info is updated to match.
    pub fn with_resolution(&self, resolution: &[usize]) -> Result<Self> {
        if resolution.len() != self.intrinsic_dim {
            return Err(Error::ChartDimensions(format!(
                "resolution has {} axes, chart has {}",
                resolution.len(),
                self.intrinsic_dim
            )));
        }
        if resolution.iter().any(|&r| r == 0) {
            return Err(Error::ChartDimensions("resolution must be positive".into()));
        }
        let mut chart = self.clone();
        chart.resolution = resolution.to_vec();
        chart.info.resolution = resolution.to_vec();
        Ok(chart)
    }

    /// Grid cell widths per axis.
    pub fn cell_widths(&self) -> Vec<f64> {
        self.domain
            .iter()
            .zip(&self.resolution)
            .map(|(&(lo, hi), &r)| (hi - lo) / r as f64)
            .collect()
    }

    /// Euclidean volume of one parameter cell.
    pub fn cell_volume(&self) -> f64 {
        self.cell_widths().iter().product()
    }

    /// Total number of grid cells.
    pub fn cell_count(&self) -> usize {
        self.resolution.iter().product()
    }

    /// Finite-difference step per axis: a quarter cell, so that every stencil
    /// anchored at a cell centre or face — the widest reaches two steps out —
    /// never leaves the closed box.
    pub fn fd_steps(&self) -> Vec<f64> {
        self.cell_widths().iter().map(|h| 0.25 * h).collect()
    }

    /// Multi-index of the flat cell id (row-major, last axis fastest).
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.intrinsic_dim];
        let mut rem = flat;
        for axis in (0..self.intrinsic_dim).rev() {
            idx[axis] = rem % self.resolution[axis];
            rem /= self.resolution[axis];
        }
        idx
    }

    /// Flat cell id of a multi-index.
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let mut flat = 0;
        for axis in 0..self.intrinsic_dim {
            flat = flat * self.resolution[axis] + multi[axis];
        }
        flat
    }

    /// Parameter-space centre of a grid cell.
    pub fn cell_center(&self, multi: &[usize]) -> Vec<f64> {
        let widths = self.cell_widths();
        multi
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.domain[axis].0 + (i as f64 + 0.5) * widths[axis])
            .collect()
    }

    /// Evaluates the map, rejecting non-finite output.
    pub fn eval(&self, u: &[f64]) -> Result<DVector<f64>> {
        let x = (self.map)(u);
        debug_assert_eq!(x.len(), self.ambient_dim);
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteMapValue { param: u.to_vec() });
        }
        Ok(DVector::from_vec(x))
    }

    /// First partial `d m / d u_axis` at `u` from the five-point fourth-order
    /// centred stencil with step `h_axis / 4`.
    ///
    /// Fourth order matters here: first partials determine the induced metric
    /// and hence every quadrature weight, and a second-order stencil would
    /// bias areas of curved charts by `O(h^2)` — enough to swamp the tiny
    /// signed margins produced by equality cases of the inequalities.
    pub fn partial(&self, u: &[f64], axis: usize) -> Result<DVector<f64>> {
        let d = self.fd_steps()[axis];
        let mut shifted = u.to_vec();
        let mut at = |offset: f64| -> Result<DVector<f64>> {
            shifted[axis] = u[axis] + offset;
            self.eval(&shifted)
        };
        let p2 = at(2.0 * d)?;
        let p1 = at(d)?;
        let m1 = at(-d)?;
        let m2 = at(-2.0 * d)?;
        Ok((8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * d))
    }

    /// All first partials `d m / d u_i` at `u`; see [`Self::partial`].
    pub fn partials(&self, u: &[f64]) -> Result<Vec<DVector<f64>>> {
        (0..self.intrinsic_dim)
            .map(|axis| self.partial(u, axis))
            .collect()
    }

    /// Centred second partials `d^2 m / d u_i d u_j` at `u` (symmetric, the
    /// full matrix is returned row-major as `out[i][j]`).
    pub fn second_partials(&self, u: &[f64]) -> Result<Vec<Vec<DVector<f64>>>> {
        let steps = self.fd_steps();
        let centre = self.eval(u)?;
        let n = self.intrinsic_dim;
        let mut out: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(n); n];
        let mut shifted = u.to_vec();
        for i in 0..n {
            for j in 0..n {
                let v = if j < i {
                    out[j][i].clone()
                } else if i == j {
                    let d = steps[i];
                    shifted[i] = u[i] + d;
                    let plus = self.eval(&shifted)?;
                    shifted[i] = u[i] - d;
                    let minus = self.eval(&shifted)?;
                    shifted[i] = u[i];
                    (plus + minus - 2.0 * centre.clone()) / (d * d)
                } else {
                    let di = steps[i];
                    let dj = steps[j];
                    shifted[i] = u[i] + di;
                    shifted[j] = u[j] + dj;
                    let pp = self.eval(&shifted)?;
                    shifted[j] = u[j] - dj;
                    let pm = self.eval(&shifted)?;
                    shifted[i] = u[i] - di;
                    let mm = self.eval(&shifted)?;
                    shifted[j] = u[j] + dj;
                    let mp = self.eval(&shifted)?;
                    shifted[i] = u[i];
                    shifted[j] = u[j];
                    (pp - pm - mp + mm) / (4.0 * di * dj)
                };
                out[i].push(v);
            }
        }
        Ok(out)
    }

    /// Second-order one-sided partial along `axis` at `u`, stepping into the
    /// domain when `inward` is `+1` (low face) or `-1` (high face).
    pub fn one_sided_partial(&self, u: &[f64], axis: usize, inward: f64) -> Result<DVector<f64>> {
        let d = self.fd_steps()[axis] * inward;
        let mut shifted = u.to_vec();
        let f0 = self.eval(u)?;
        shifted[axis] = u[axis] + d;
        let f1 = self.eval(&shifted)?;
        shifted[axis] = u[axis] + 2.0 * d;
        let f2 = self.eval(&shifted)?;
        // (-3 f0 + 4 f1 - f2) / (2 d): O(d^2) accurate, uses interior points only.
        Ok((f1 * 4.0 - f0 * 3.0 - f2) / (2.0 * d))
    }
}
