//! Sampling charts into warped-product geometry.
//!
//! The ambient space is `ℝ × ℝ^{n+k}` with metric `dt² + w(t)² dy²`; the
//! first ambient coordinate is the distinguished one. A [`WarpedImmersion`]
//! carries, alongside the plain Euclidean sampling of the same chart, the
//! metric-aware data: frames orthonormal in the warped inner product,
//! quadrature weights from the warped Gram determinant, boundary nodes with
//! warped areas, and mean curvature computed with the warped connection.
//!
//! The connection enters through the only nonzero Christoffel families of
//! the metric: `Γ^t_{y_a y_b} = -w w' δ_{ab}` and
//! `Γ^{y_a}_{t y_b} = (w'/w) δ_{ab}`, so the covariant second derivative of
//! the chart map is the flat second partial plus a correction assembled from
//! `w` and `w'` — no generic metric differentiation is involved.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::immersion::{
    sample_boundary_with_inner, BoundaryNode, SampledImmersion, METRIC_DEGENERACY_TOL,
};
use crate::geometry::subspace::Subspace;
use crate::geometry::{sample_immersion, ParametricChart};
use crate::linalg;
use crate::warped::metric::WarpedMetric;

/// Allowed deviation of stored frames from orthonormality in the warped
/// inner product, and of curvature vectors from warped-normality.
pub const WARPED_FRAME_TOL: f64 = 1e-8;

/// The warped inner product at warp value `w`:
/// `⟨a, b⟩ = a₀b₀ + w² Σ_{c≥1} a_c b_c`.
pub fn warped_inner(w: f64, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let mut fibre = 0.0;
    for c in 1..a.len() {
        fibre += a[c] * b[c];
    }
    a[0] * b[0] + w * w * fibre
}

/// A chart sampled in both the Euclidean and the warped-product metric.
#[derive(Debug, Clone)]
pub struct WarpedImmersion {
    base: SampledImmersion,
    metric: WarpedMetric,
    tau: Vec<f64>,
    frames: Vec<DMatrix<f64>>,
    mean_curvature: Vec<DVector<f64>>,
    weights: Vec<f64>,
    boundary: Vec<BoundaryNode>,
}

impl WarpedImmersion {
    /// The Euclidean sampling of the same chart (shared points, info, chart
    /// access for test functions).
    pub fn base(&self) -> &SampledImmersion {
        &self.base
    }

    pub fn metric(&self) -> &WarpedMetric {
        &self.metric
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.base.intrinsic_dim
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// First ambient coordinate of each node.
    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// Warp value at node `i`.
    pub fn warp(&self, i: usize) -> f64 {
        self.metric.w(self.tau[i])
    }

    /// Frames orthonormal in the warped inner product, one `ambient x n`
    /// matrix per node.
    pub fn frames(&self) -> &[DMatrix<f64>] {
        &self.frames
    }

    /// Mean curvature vectors of the immersion in the warped ambient space,
    /// normal to the tangent plane in the warped inner product.
    pub fn mean_curvature(&self) -> &[DVector<f64>] {
        &self.mean_curvature
    }

    /// Length of the mean curvature vector at node `i`, measured in the
    /// warped metric.
    pub fn curvature_norm(&self, i: usize) -> f64 {
        let h = &self.mean_curvature[i];
        warped_inner(self.warp(i), h, h).max(0.0).sqrt()
    }

    /// Quadrature weights: warped volume elements times cell volume.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Boundary nodes with warped areas and warped-unit conormals.
    pub fn boundary(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    /// Total warped volume.
    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Total warped boundary area.
    pub fn boundary_volume(&self) -> f64 {
        self.boundary.iter().map(|b| b.weight).sum()
    }

    fn validate(&self) -> Result<()> {
        for (i, (point, frame)) in self.base.points.iter().zip(&self.frames).enumerate() {
            if self.tau[i] != point[0] {
                return Err(Error::DimensionMismatch(format!(
                    "tau at node {i} disagrees with the first coordinate"
                )));
            }
            let w = self.metric.w(self.tau[i]);
            let n = frame.ncols();
            for a in 0..n {
                for b in 0..n {
                    let qa = DVector::from_column_slice(frame.column(a).as_slice());
                    let qb = DVector::from_column_slice(frame.column(b).as_slice());
                    let target = if a == b { 1.0 } else { 0.0 };
                    if (warped_inner(w, &qa, &qb) - target).abs() > WARPED_FRAME_TOL {
                        return Err(Error::NotOrthonormal {
                            deviation: (warped_inner(w, &qa, &qb) - target).abs(),
                            tol: WARPED_FRAME_TOL,
                        });
                    }
                }
            }
            let h = &self.mean_curvature[i];
            let scale = 1.0 + self.curvature_norm(i);
            for a in 0..n {
                let qa = DVector::from_column_slice(frame.column(a).as_slice());
                let tangential = warped_inner(w, h, &qa).abs();
                if tangential > WARPED_FRAME_TOL * scale {
                    return Err(Error::DimensionMismatch(format!(
                        "warped curvature at node {i} has tangential component {tangential:.3e}"
                    )));
                }
            }
        }
        for (i, &w) in self.weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::BadMass { index: i, mass: w });
            }
        }
        Ok(())
    }
}

/// Samples `chart` in the warped-product metric. The chart must map into
/// `ℝ × ℝ^{n+k}` (ambient dimension at least intrinsic + 1); the warp is
/// positivity- and derivative-checked over the sampled `τ` range.
pub fn warped_geometry(chart: &ParametricChart, metric: &WarpedMetric) -> Result<WarpedImmersion> {
    let n = chart.intrinsic_dim();
    let d = chart.ambient_dim();
    if d < n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "warped ambient needs the t factor plus at least {n} fibre dimensions, got ambient {d}"
        )));
    }
    let base = sample_immersion(chart)?;

    let mut tau_lo = f64::INFINITY;
    let mut tau_hi = f64::NEG_INFINITY;
    for p in &base.points {
        tau_lo = tau_lo.min(p[0]);
        tau_hi = tau_hi.max(p[0]);
    }
    metric.validate_range(tau_lo, tau_hi)?;

    let cell_volume = chart.cell_volume();
    let count = chart.cell_count();
    let mut tau = Vec::with_capacity(count);
    let mut frames = Vec::with_capacity(count);
    let mut curvature = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);

    for flat in 0..count {
        let multi = chart.multi_index(flat);
        let u = chart.cell_center(&multi);
        let x = &base.points[flat];
        let t = x[0];
        let w = metric.w(t);
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::NonPositiveWarp { t, w });
        }
        let wp = metric.w_prime(t);
        let partials = chart.partials(&u)?;

        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] = warped_inner(w, &partials[i], &partials[j]);
            }
        }
        let det = gram.determinant();
        if !(det > METRIC_DEGENERACY_TOL) {
            return Err(Error::DegenerateMetric {
                cell: multi,
                det,
                tol: METRIC_DEGENERACY_TOL,
            });
        }
        let inner = |a: &DVector<f64>, b: &DVector<f64>| warped_inner(w, a, b);
        let frame_vectors = linalg::orthonormalize(&partials, &inner)?;

        let second = chart.second_partials(&u)?;
        let gram_inv = gram.clone().try_inverse().ok_or(Error::DegenerateMetric {
            cell: chart.multi_index(flat),
            det,
            tol: METRIC_DEGENERACY_TOL,
        })?;
        let mut h = DVector::zeros(d);
        for i in 0..n {
            for j in 0..n {
                // Covariant second derivative: flat second partial plus the
                // Christoffel correction of dt² + w² dy².
                let mut covariant = second[i][j].clone();
                let mut fibre_dot = 0.0;
                for c in 1..d {
                    fibre_dot += partials[i][c] * partials[j][c];
                }
                covariant[0] -= w * wp * fibre_dot;
                let ratio = wp / w;
                for c in 1..d {
                    covariant[c] +=
                        ratio * (partials[i][0] * partials[j][c] + partials[j][0] * partials[i][c]);
                }
                // Warped-normal part.
                for q in &frame_vectors {
                    let coefficient = inner(&covariant, q);
                    covariant.axpy(-coefficient, q, 1.0);
                }
                h.axpy(gram_inv[(i, j)], &covariant, 1.0);
            }
        }
        h /= n as f64;

        tau.push(t);
        frames.push(linalg::columns_to_matrix(&frame_vectors));
        curvature.push(h);
        weights.push(det.sqrt() * cell_volume);
    }

    let boundary = sample_boundary_with_inner(chart, &|point, a, b| {
        warped_inner(metric.w(point[0]), a, b)
    })?;

    let immersion = WarpedImmersion {
        base,
        metric: metric.clone(),
        tau,
        frames,
        mean_curvature: curvature,
        weights,
        boundary,
    };
    immersion.validate()?;
    Ok(immersion)
}

fn check_subspace(m: &WarpedImmersion, e: &Subspace) -> Result<()> {
    if e.ambient_dim() != m.ambient_dim() - 1 {
        return Err(Error::DimensionMismatch(format!(
            "reference subspace must live in the fibre ℝ^{}, got ambient {}",
            m.ambient_dim() - 1,
            e.ambient_dim()
        )));
    }
    if e.dim() != m.intrinsic_dim() {
        return Err(Error::DimensionMismatch(format!(
            "reference subspace dimension {} does not match intrinsic dimension {}",
            e.dim(),
            m.intrinsic_dim()
        )));
    }
    Ok(())
}

/// Fibre-frame projection Jacobian `J_E ∈ [0, 1]` at node `index`: the
/// absolute determinant of the overlap between the warped tangent frame
/// (fibre components rescaled by `w`, which makes them Euclidean-orthonormal
/// in `ℝ^{1+n+k}`) and a basis of `e ⊂ ℝ^{n+k}`.
///
/// The Jacobian of the actual ambient-to-`e` projection is `J_E / w^n`; see
/// [`warped_full_projection_jacobian`].
pub fn warped_projection_jacobian(
    m: &WarpedImmersion,
    e: &Subspace,
    index: usize,
) -> Result<f64> {
    check_subspace(m, e)?;
    if index >= m.len() {
        return Err(Error::PointIndex {
            index,
            len: m.len(),
        });
    }
    let n = m.intrinsic_dim();
    let w = m.warp(index);
    let frame = &m.frames[index];
    let basis = e.basis();
    let mut overlap = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut sum = 0.0;
            for c in 0..e.ambient_dim() {
                sum += basis[(c, j)] * w * frame[(c + 1, i)];
            }
            overlap[(j, i)] = sum;
        }
    }
    Ok(overlap.determinant().abs().min(1.0))
}

/// Jacobian determinant of the projection `(t, y) ↦ π_E(y)` restricted to
/// the surface, `J_E / w(τ)^n`.
pub fn warped_full_projection_jacobian(
    m: &WarpedImmersion,
    e: &Subspace,
    index: usize,
) -> Result<f64> {
    let j = warped_projection_jacobian(m, e, index)?;
    Ok(j / m.warp(index).powi(m.intrinsic_dim() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    /// Annulus in the slice `{t0} × ℝ²`, in polar coordinates so the chart
    /// has nontrivial second partials.
    fn slice_annulus(t0: f64, res: usize) -> ParametricChart {
        ParametricChart::new(
            vec![(0.3, 1.0), (0.0, 2.0 * PI)],
            vec![res, res],
            vec![false, true],
            3,
            Arc::new(move |u: &[f64]| vec![t0, u[0] * u[1].cos(), u[0] * u[1].sin()]),
        )
        .unwrap()
    }

    fn presets() -> Vec<(&'static str, WarpedMetric)> {
        vec![
            ("constant", WarpedMetric::euclidean()),
            ("exponential", WarpedMetric::hyperbolic()),
            (
                "cosh",
                WarpedMetric::custom(Arc::new(f64::cosh), Arc::new(f64::sinh)),
            ),
            (
                "quadratic",
                WarpedMetric::custom(Arc::new(|t| 1.0 + t * t), Arc::new(|t| 2.0 * t)),
            ),
            (
                "oscillating",
                WarpedMetric::custom(Arc::new(|t| 2.0 + t.sin()), Arc::new(f64::cos)),
            ),
        ]
    }

    #[test]
    fn unit_warp_reproduces_the_euclidean_sampler() {
        let chart = crate::geometry::catalog::build("sphere-cap", &[("theta_max", 1.3)], &[32, 32])
            .unwrap();
        let flat = sample_immersion(&chart).unwrap();
        let warped = warped_geometry(&chart, &WarpedMetric::euclidean()).unwrap();
        assert_eq!(flat.len(), warped.len());
        for i in 0..flat.len() {
            assert_abs_diff_eq!(flat.weights[i], warped.weights()[i], epsilon = 1e-10);
            assert_abs_diff_eq!(
                (&flat.frames[i] - &warped.frames()[i]).norm(),
                0.0,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                (&flat.mean_curvature[i] - &warped.mean_curvature()[i]).norm(),
                0.0,
                epsilon = 1e-10
            );
            assert_eq!(warped.tau()[i], flat.points[i][0]);
        }
        assert_eq!(flat.boundary.len(), warped.boundary().len());
        for (a, b) in flat.boundary.iter().zip(warped.boundary()) {
            assert_abs_diff_eq!(a.weight, b.weight, epsilon = 1e-10);
            assert_abs_diff_eq!((&a.conormal - &b.conormal).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn slices_are_umbilic_with_curvature_set_by_the_warp() {
        // |H| = |w'(t0)| / w(t0) on any slice, for every warp. The chart is
        // exactly a flat slice, so the only discretisation error is the
        // finite-difference one; it must shrink at second order.
        for (label, metric) in presets() {
            for t0 in [-0.5, 0.2, 1.0] {
                let expected = (metric.w_prime(t0) / metric.w(t0)).abs();
                let errs: Vec<f64> = [16usize, 32]
                    .iter()
                    .map(|&res| {
                        let m = warped_geometry(&slice_annulus(t0, res), &metric).unwrap();
                        (0..m.len())
                            .map(|i| (m.curvature_norm(i) - expected).abs())
                            .fold(0.0f64, f64::max)
                    })
                    .collect();
                if expected == 0.0 {
                    assert!(errs[1] < 1e-8, "{label} t0={t0}: errors {errs:?}");
                } else {
                    assert!(
                        errs[1] < 1e-6 * (1.0 + expected),
                        "{label} t0={t0}: errors {errs:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn hyperbolic_slices_are_horospheres() {
        // w = e^t gives |H| = 1 on every slice — the standard horosphere.
        for t0 in [-0.7, 0.0, 0.9] {
            let m = warped_geometry(&slice_annulus(t0, 24), &WarpedMetric::hyperbolic()).unwrap();
            for i in [0, m.len() / 2, m.len() - 1] {
                assert_abs_diff_eq!(m.curvature_norm(i), 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn frames_are_orthonormal_in_the_warped_metric() {
        let chart = ParametricChart::new(
            vec![(0.2, 1.2), (0.2, 1.2)],
            vec![12, 12],
            vec![false, false],
            3,
            Arc::new(|u: &[f64]| vec![0.4 * (u[0] + u[1]), u[0], u[1]]),
        )
        .unwrap();
        let m = warped_geometry(&chart, &WarpedMetric::hyperbolic()).unwrap();
        for i in 0..m.len() {
            let w = m.warp(i);
            let f = &m.frames()[i];
            for a in 0..2 {
                for b in 0..2 {
                    let qa = DVector::from_column_slice(f.column(a).as_slice());
                    let qb = DVector::from_column_slice(f.column(b).as_slice());
                    let target = if a == b { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(warped_inner(w, &qa, &qb), target, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn slice_parallel_to_the_reference_plane_has_unit_jacobian() {
        let m = warped_geometry(&slice_annulus(0.5, 16), &WarpedMetric::hyperbolic()).unwrap();
        let e = Subspace::coordinate(2, &[0, 1]).unwrap();
        let w = 0.5f64.exp();
        for i in [0, m.len() / 3, m.len() - 1] {
            assert_abs_diff_eq!(warped_projection_jacobian(&m, &e, i).unwrap(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(
                warped_full_projection_jacobian(&m, &e, i).unwrap(),
                1.0 / (w * w),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn tangent_planes_containing_the_vertical_project_to_zero() {
        // The (t, y1)-plane: its projection to the fibre plane has rank 1.
        let chart = ParametricChart::new(
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![8, 8],
            vec![false, false],
            3,
            Arc::new(|u: &[f64]| vec![u[0], u[1], 0.0]),
        )
        .unwrap();
        let m = warped_geometry(&chart, &WarpedMetric::hyperbolic()).unwrap();
        let e = Subspace::coordinate(2, &[0, 1]).unwrap();
        for i in 0..m.len() {
            assert_abs_diff_eq!(warped_projection_jacobian(&m, &e, i).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_jacobian_matches_difference_quotients() {
        // Graph t = 0.4 sin(y1) cos(y2) in the hyperbolic ambient. The
        // oracle measures the image area of a small parameter square under
        // p ∘ F against the warped surface area of the same square.
        let chart = ParametricChart::new(
            vec![(0.2, 1.2), (0.2, 1.2)],
            vec![10, 10],
            vec![false, false],
            3,
            Arc::new(|u: &[f64]| vec![0.4 * u[0].sin() * u[1].cos(), u[0], u[1]]),
        )
        .unwrap();
        let metric = WarpedMetric::hyperbolic();
        let m = warped_geometry(&chart, &metric).unwrap();
        let e = Subspace::coordinate(2, &[0, 1]).unwrap();
        let delta = 1e-3;
        for index in [0, 27, 55, 99] {
            let u0 = chart.cell_center(&chart.multi_index(index));
            // Projected edge vectors of the parameter square.
            let mut edges = Vec::new();
            for axis in 0..2 {
                let mut plus = u0.clone();
                plus[axis] += delta;
                let mut minus = u0.clone();
                minus[axis] -= delta;
                let diff = (chart.eval(&plus).unwrap() - chart.eval(&minus).unwrap()) / (2.0 * delta);
                edges.push(DVector::from_vec(vec![diff[1], diff[2]]));
            }
            let image_area = (edges[0][0] * edges[1][1] - edges[0][1] * edges[1][0]).abs();
            // Warped area density from the Gram determinant of the partials.
            let partials = chart.partials(&u0).unwrap();
            let w = metric.w(chart.eval(&u0).unwrap()[0]);
            let mut gram = DMatrix::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    gram[(i, j)] = warped_inner(w, &partials[i], &partials[j]);
                }
            }
            let fd_jacobian = image_area / gram.determinant().sqrt();
            let reported = warped_full_projection_jacobian(&m, &e, index).unwrap();
            assert_abs_diff_eq!(reported, fd_jacobian, epsilon = 1e-6);
        }
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let m = warped_geometry(&slice_annulus(0.0, 8), &WarpedMetric::euclidean()).unwrap();
        let wrong_ambient = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert!(matches!(
            warped_projection_jacobian(&m, &wrong_ambient, 0),
            Err(Error::DimensionMismatch(_))
        ));
        let wrong_dim = Subspace::coordinate(2, &[0]).unwrap();
        assert!(matches!(
            warped_projection_jacobian(&m, &wrong_dim, 0),
            Err(Error::DimensionMismatch(_))
        ));
        let flat_chart = ParametricChart::new(
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![4, 4],
            vec![false, false],
            2,
            Arc::new(|u: &[f64]| vec![u[0], u[1]]),
        )
        .unwrap();
        assert!(matches!(
            warped_geometry(&flat_chart, &WarpedMetric::euclidean()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn negative_warp_on_the_sampled_range_fails() {
        let metric = WarpedMetric::custom(Arc::new(|t| t), Arc::new(|_| 1.0));
        match warped_geometry(&slice_annulus(-2.0, 8), &metric) {
            Err(Error::NonPositiveWarp { t, w }) => {
                assert_eq!(t, -2.0);
                assert!(w <= 0.0);
            }
            other => panic!("expected positivity failure, got {other:?}"),
        }
    }
}
