//! Compactly supported test functions sampled on an immersion.
//!
//! A [`TestFunction`] carries one value and one tangential gradient vector
//! per quadrature node. Functions come from named families (ambient radial
//! bumps, smoothed indicators, chart-coordinate product bumps) so a report
//! can be reproduced from its parameters alone. Construction enforces the
//! support invariant: the function vanishes on a declared collar of the
//! chart's genuine boundary faces, so boundary terms of the integration by
//! parts underlying the inequalities drop exactly. Degenerate chart faces
//! (polar seams, where the surface continues smoothly) are exempt.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::chart::ParametricChart;
use crate::geometry::immersion::{SampledImmersion, METRIC_DEGENERACY_TOL};

/// Default fraction of each chart axis treated as the boundary collar.
pub const DEFAULT_COLLAR: f64 = 0.05;

/// Allowed normal-component leak of a stored gradient, relative to its norm.
pub const GRADIENT_TANGENCY_TOL: f64 = 1e-8;

/// A scalar field with its tangential gradient, sampled at the nodes of one
/// immersion.
#[derive(Debug, Clone)]
pub struct TestFunction {
    values: Vec<f64>,
    tangential_gradient: Vec<DVector<f64>>,
    collar: f64,
    family: String,
}

impl TestFunction {
    /// Validates raw samples against an immersion: matching lengths, finite
    /// entries, gradients tangent to the stored frames, a non-trivial
    /// support, and support clear of the boundary collar.
    pub fn from_parts(
        m: &SampledImmersion,
        values: Vec<f64>,
        tangential_gradient: Vec<DVector<f64>>,
        collar: f64,
        family: &str,
    ) -> Result<Self> {
        if values.len() != m.len() || tangential_gradient.len() != m.len() {
            return Err(Error::DimensionMismatch(format!(
                "test function has {} values and {} gradients for {} nodes",
                values.len(),
                tangential_gradient.len(),
                m.len()
            )));
        }
        if !(0.0..0.5).contains(&collar) {
            return Err(Error::SupportTouchesBoundary(format!(
                "collar fraction {collar} outside [0, 0.5)"
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::BadAtom { index: i });
            }
        }
        for (i, (g, f)) in tangential_gradient.iter().zip(&m.frames).enumerate() {
            if g.len() != m.ambient_dim || g.iter().any(|c| !c.is_finite()) {
                return Err(Error::BadAtom { index: i });
            }
            let normal = (g - f * (f.transpose() * g)).norm();
            if normal > GRADIENT_TANGENCY_TOL * (1.0 + g.norm()) {
                return Err(Error::DimensionMismatch(format!(
                    "gradient at node {i} has normal component {normal:.3e}"
                )));
            }
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroTestFunction);
        }
        let u = Self {
            values,
            tangential_gradient,
            collar,
            family: family.to_owned(),
        };
        u.check_collar(m)?;
        Ok(u)
    }

    /// Ambient radial bump `(1 - |x-c|^2/R^2)^3` inside radius `R` of
    /// `center`, zero outside; continuously twice differentiable.
    pub fn radial_bump(
        m: &SampledImmersion,
        center: &DVector<f64>,
        radius: f64,
    ) -> Result<Self> {
        if center.len() != m.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "bump centre has dimension {}, ambient is {}",
                center.len(),
                m.ambient_dim
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::SurfaceParameter(format!(
                "bump radius must be positive, got {radius}"
            )));
        }
        let mut values = Vec::with_capacity(m.len());
        let mut gradients = Vec::with_capacity(m.len());
        for (x, frame) in m.points.iter().zip(&m.frames) {
            let offset = x - center;
            let s = offset.norm_squared() / (radius * radius);
            if s >= 1.0 {
                values.push(0.0);
                gradients.push(DVector::zeros(m.ambient_dim));
            } else {
                values.push((1.0 - s).powi(3));
                // d/dx (1-s)^3 = -3 (1-s)^2 * 2 (x-c)/R^2.
                let ambient = offset * (-6.0 * (1.0 - s).powi(2) / (radius * radius));
                gradients.push(frame * (frame.transpose() * ambient));
            }
        }
        Self::from_parts(
            m,
            values,
            gradients,
            DEFAULT_COLLAR,
            &format!("radial-bump(radius={radius})"),
        )
    }

    /// Smoothed indicator of the ambient ball of radius `radius` around
    /// `center`: identically 1 inside `radius - width`, 0 outside `radius`,
    /// with a quintic ramp over the `width` shell. As `width` shrinks this
    /// approaches the sharp indicator whose Sobolev data reproduces the
    /// isoperimetric quantities of the enclosed region.
    pub fn smoothed_indicator(
        m: &SampledImmersion,
        center: &DVector<f64>,
        radius: f64,
        width: f64,
    ) -> Result<Self> {
        if center.len() != m.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "indicator centre has dimension {}, ambient is {}",
                center.len(),
                m.ambient_dim
            )));
        }
        if !(radius.is_finite() && radius > 0.0 && width.is_finite()) || !(width > 0.0) {
            return Err(Error::SurfaceParameter(format!(
                "indicator needs positive radius and width, got {radius} and {width}"
            )));
        }
        if width >= radius {
            return Err(Error::SurfaceParameter(format!(
                "ramp width {width} must be smaller than radius {radius}"
            )));
        }
        let mut values = Vec::with_capacity(m.len());
        let mut gradients = Vec::with_capacity(m.len());
        for (x, frame) in m.points.iter().zip(&m.frames) {
            let offset = x - center;
            let distance = offset.norm();
            let t = (distance - (radius - width)) / width;
            if t <= 0.0 {
                values.push(1.0);
                gradients.push(DVector::zeros(m.ambient_dim));
            } else if t >= 1.0 {
                values.push(0.0);
                gradients.push(DVector::zeros(m.ambient_dim));
            } else {
                // Descending quintic smoothstep: C^2 at both ends.
                values.push(1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t));
                let slope = -30.0 * t * t * (1.0 - t) * (1.0 - t) / width;
                let ambient = offset * (slope / distance);
                gradients.push(frame * (frame.transpose() * ambient));
            }
        }
        Self::from_parts(
            m,
            values,
            gradients,
            DEFAULT_COLLAR,
            &format!("smoothed-indicator(radius={radius},width={width})"),
        )
    }

    /// Product bump in chart coordinates: along every non-periodic axis the
    /// normalised coordinate `t` is rescaled to `[collar, 1-collar]` and
    /// contributes `(4 s (1-s))^3`; periodic axes contribute 1. The gradient
    /// is the Riemannian gradient of the chart expression.
    pub fn chart_bump(m: &SampledImmersion, collar: f64) -> Result<Self> {
        let chart = m.chart().ok_or(Error::MissingChart)?;
        let r = chart.intrinsic_dim();
        let mut values = Vec::with_capacity(m.len());
        let mut gradients = Vec::with_capacity(m.len());
        for flat in 0..m.len() {
            let center = chart.cell_center(&chart.multi_index(flat));
            // Per-axis factor and its derivative w.r.t. the raw coordinate.
            let mut factors = vec![1.0; r];
            let mut dfactors = vec![0.0; r];
            for (axis, &(lo, hi)) in chart.domain().iter().enumerate() {
                if chart.periodic()[axis] {
                    continue;
                }
                let t = (center[axis] - lo) / (hi - lo);
                let s = (t - collar) / (1.0 - 2.0 * collar);
                if !(0.0..=1.0).contains(&s) {
                    factors[axis] = 0.0;
                    continue;
                }
                let b = 4.0 * s * (1.0 - s);
                factors[axis] = b.powi(3);
                // d/du [ (4 s (1-s))^3 ] with s linear in u.
                let ds_du = 1.0 / ((1.0 - 2.0 * collar) * (hi - lo));
                dfactors[axis] = 3.0 * b * b * 4.0 * (1.0 - 2.0 * s) * ds_du;
            }
            let value: f64 = factors.iter().product();
            values.push(value);
            if value == 0.0 {
                gradients.push(DVector::zeros(m.ambient_dim));
                continue;
            }
            // Intrinsic differential, then raise the index with the induced
            // metric: grad = J (J^T J)^{-1} du.
            let mut du = DVector::zeros(r);
            for axis in 0..r {
                if dfactors[axis] != 0.0 {
                    du[axis] = dfactors[axis] * value / factors[axis];
                }
            }
            let partials = chart.partials(&center)?;
            let jac = crate::linalg::columns_to_matrix(&partials);
            let gram = jac.transpose() * &jac;
            let det = gram.determinant();
            let coeffs = gram
                .cholesky()
                .ok_or_else(|| Error::DegenerateMetric {
                    cell: chart.multi_index(flat),
                    det,
                    tol: METRIC_DEGENERACY_TOL,
                })?
                .solve(&du);
            gradients.push(jac * coeffs);
        }
        Self::from_parts(
            m,
            values,
            gradients,
            collar,
            &format!("chart-bump(collar={collar})"),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tangential_gradient(&self) -> &[DVector<f64>] {
        &self.tangential_gradient
    }

    /// Declared collar fraction near the chart boundary.
    pub fn collar(&self) -> f64 {
        self.collar
    }

    /// Which parametric family produced this function.
    pub fn family(&self) -> &str {
        &self.family
    }

    /// The function multiplied by a positive constant.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            tangential_gradient: self.tangential_gradient.iter().map(|g| g * c).collect(),
            collar: self.collar,
            family: format!("{}*{c}", self.family),
        }
    }

    /// Ensures the support stays off the collar of every genuine boundary
    /// face. Faces whose induced metric degenerates (a polar seam rather
    /// than a boundary) are exempt.
    fn check_collar(&self, m: &SampledImmersion) -> Result<()> {
        let chart = m.chart().ok_or(Error::MissingChart)?;
        let mut genuine_lo = vec![false; chart.intrinsic_dim()];
        let mut genuine_hi = vec![false; chart.intrinsic_dim()];
        for axis in 0..chart.intrinsic_dim() {
            if chart.periodic()[axis] {
                continue;
            }
            genuine_lo[axis] = !face_is_seam(chart, axis, false)?;
            genuine_hi[axis] = !face_is_seam(chart, axis, true)?;
        }
        for flat in 0..m.len() {
            let supported =
                self.values[flat] != 0.0 || self.tangential_gradient[flat].norm() > 0.0;
            if !supported {
                continue;
            }
            let center = chart.cell_center(&chart.multi_index(flat));
            for (axis, &(lo, hi)) in chart.domain().iter().enumerate() {
                let t = (center[axis] - lo) / (hi - lo);
                if (genuine_lo[axis] && t < self.collar) || (genuine_hi[axis] && t > 1.0 - self.collar)
                {
                    return Err(Error::SupportTouchesBoundary(format!(
                        "node {flat} (normalised axis-{axis} coordinate {t:.4}) is supported \
                         within the collar {:.4} of a boundary face",
                        self.collar
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest mismatch between stored gradients and centred finite
    /// differences of the stored values across neighbouring cells, relative
    /// to the local derivative scale. Decays linearly (or faster) with the
    /// grid spacing for the built-in families.
    pub fn fd_residual(&self, m: &SampledImmersion) -> Result<f64> {
        let chart = m.chart().ok_or(Error::MissingChart)?;
        let res = chart.resolution();
        let widths = chart.cell_widths();
        let mut worst = 0.0f64;
        for flat in 0..m.len() {
            let multi = chart.multi_index(flat);
            let center = chart.cell_center(&multi);
            for axis in 0..chart.intrinsic_dim() {
                let (prev, next) = match neighbor_pair(&multi, axis, res, chart.periodic()[axis]) {
                    Some(pair) => pair,
                    None => continue,
                };
                let fd = (self.values[chart.flat_index(&next)]
                    - self.values[chart.flat_index(&prev)])
                    / (2.0 * widths[axis]);
                let predicted = chart
                    .partial(&center, axis)?
                    .dot(&self.tangential_gradient[flat]);
                let scale = 1.0 + fd.abs().max(predicted.abs());
                worst = worst.max((fd - predicted).abs() / scale);
            }
        }
        Ok(worst)
    }
}

/// Neighbouring multi-indices one cell away along `axis`, wrapping on
/// periodic axes and skipping edge cells otherwise.
fn neighbor_pair(
    multi: &[usize],
    axis: usize,
    res: &[usize],
    periodic: bool,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = res[axis];
    let (lo, hi) = if periodic {
        (
            (multi[axis] + n - 1) % n,
            (multi[axis] + 1) % n,
        )
    } else {
        if multi[axis] == 0 || multi[axis] + 1 >= n {
            return None;
        }
        (multi[axis] - 1, multi[axis] + 1)
    };
    let mut prev = multi.to_vec();
    let mut next = multi.to_vec();
    prev[axis] = lo;
    next[axis] = hi;
    Some((prev, next))
}

/// True when the face `u_axis = lo` (or `hi`) collapses: the induced metric
/// of the face, spanned by the partials along the remaining axes at the face
/// centre, is degenerate. Such faces are seams of the parametrisation, not
/// boundary.
fn face_is_seam(chart: &ParametricChart, axis: usize, upper: bool) -> Result<bool> {
    let r = chart.intrinsic_dim();
    if r == 1 {
        return Ok(false);
    }
    let mut u: Vec<f64> = chart
        .domain()
        .iter()
        .map(|&(lo, hi)| 0.5 * (lo + hi))
        .collect();
    u[axis] = if upper {
        chart.domain()[axis].1
    } else {
        chart.domain()[axis].0
    };
    let mut gram = nalgebra::DMatrix::zeros(r - 1, r - 1);
    let partials: Vec<DVector<f64>> = (0..r)
        .filter(|&a| a != axis)
        .map(|a| chart.partial(&u, a))
        .collect::<Result<_>>()?;
    for i in 0..r - 1 {
        for j in 0..r - 1 {
            gram[(i, j)] = partials[i].dot(&partials[j]);
        }
    }
    let scale = partials
        .iter()
        .map(|p| p.norm_squared())
        .fold(1.0f64, f64::max)
        .powi((r - 1) as i32);
    Ok(gram.determinant().abs() <= METRIC_DEGENERACY_TOL * scale)
}
