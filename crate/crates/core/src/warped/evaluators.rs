//! Inequality evaluators in warped-product ambient spaces.
//!
//! These mirror the Euclidean evaluators with three systematic changes —
//! each integral uses the warped volume elements, the projection Jacobian
//! acquires the warp factor `w^n` on the left-hand side, and the right-hand
//! integrands carry the weight `w^{(n-p)/(n-1)}` — chosen so that the Hölder
//! step relating the `L^1` and `L^p` forms closes exactly. With `w ≡ 1`
//! every formula reduces to its Euclidean counterpart.

use std::collections::BTreeMap;

use crate::constants::unit_ball_volume;
use crate::error::{Error, Result};
use crate::geometry::subspace::Subspace;
use crate::inequalities::evaluators::{CURVATURE_FLAG, JACOBIAN_FLOOR};
use crate::inequalities::report::InequalityReport;
use crate::inequalities::test_function::TestFunction;
use crate::warped::geometry::{warped_projection_jacobian, WarpedImmersion};

fn require_dim(m: &WarpedImmersion) -> Result<usize> {
    let n = m.intrinsic_dim();
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "inequality evaluators need intrinsic dimension >= 2, got {n}"
        )));
    }
    Ok(n)
}

fn jacobians(m: &WarpedImmersion, e: &Subspace) -> Result<Vec<f64>> {
    (0..m.len())
        .map(|i| warped_projection_jacobian(m, e, i))
        .collect()
}

fn check_lengths(m: &WarpedImmersion, u: &TestFunction) -> Result<()> {
    if u.len() != m.len() {
        return Err(Error::DimensionMismatch(format!(
            "test function has {} samples for {} nodes",
            u.len(),
            m.len()
        )));
    }
    Ok(())
}

/// Length of the test-function gradient in the warped metric at node `i`.
///
/// The stored gradient is the Euclidean tangential gradient `g`; since the
/// differential satisfies `du(q) = ⟨g, q⟩` for every tangent vector `q`, the
/// warped gradient length is recovered from the warped-orthonormal frame as
/// `(Σ_k du(q_k)²)^{1/2}` without re-differentiating.
fn warped_gradient_norm(m: &WarpedImmersion, u: &TestFunction, i: usize) -> f64 {
    let g = &u.tangential_gradient()[i];
    let frame = &m.frames()[i];
    let mut sum = 0.0;
    for k in 0..frame.ncols() {
        let mut a = 0.0;
        for c in 0..frame.nrows() {
            a += g[c] * frame[(c, k)];
        }
        sum += a * a;
    }
    sum.sqrt()
}

/// Isoperimetric inequality in the warped product `dt² + w(t)² dy²`:
///
/// `n ω_n^{1/n} (∫ (w^n J)^{1/(n-1)} dv)^{(n-1)/n}
///    <=  ∫_∂ w dσ + n ∫ w |H| dv`,
///
/// with all measures, Jacobians, and curvature norms taken in the warped
/// metric. Equality holds for a flat ball inside a slice of constant `t`
/// when `w ≡ 1`; a horosphere slice under `w = e^t` has strict slack.
pub fn warped_weighted_isoperimetric(
    m: &WarpedImmersion,
    e: &Subspace,
) -> Result<InequalityReport> {
    let n = require_dim(m)?;
    if m.boundary().is_empty() {
        return Err(Error::MissingBoundary);
    }
    let jac = jacobians(m, e)?;
    let omega = unit_ball_volume(n)?;
    let nf = n as f64;

    let mut weighted_volume = 0.0;
    let mut curvature = 0.0;
    for i in 0..m.len() {
        let vol = m.weights()[i];
        let w = m.warp(i);
        weighted_volume += vol * (w.powi(n as i32) * jac[i]).powf(1.0 / (nf - 1.0));
        curvature += vol * w * m.curvature_norm(i);
    }
    let lhs = nf * omega.powf(1.0 / nf) * weighted_volume.powf((nf - 1.0) / nf);
    let boundary: f64 = m
        .boundary()
        .iter()
        .map(|b| b.weight * m.metric().w(b.point[0]))
        .sum();
    let rhs = boundary + nf * curvature;

    let mut constants = BTreeMap::new();
    constants.insert("omega_n".to_owned(), omega);
    InequalityReport::new(
        "warped-weighted-isoperimetric",
        lhs,
        rhs,
        &m.base().info,
        constants,
        vec![],
    )
}

/// `L^p` Sobolev inequality in the warped product, `1 < p < n`:
///
/// `s_np (∫ (w^n J)^{1/(n-1)} |u|^{np/(n-p)})^{(n-p)/(np)}
///    <= (∫ J^{-(p-1)/(n-1)} w^{(n-p)/(n-1)} |∇u|^p)^{1/p}
///       + (n(n-p)/(p(n-1))) (∫ J^{-(p-1)/(n-1)} w^{(n-p)/(n-1)} |H|^p |u|^p)^{1/p}`,
///
/// where gradients and curvature are measured in the warped metric. The
/// curvature term is raised to the p-th power inside its integral exactly as
/// in the Euclidean evaluator; the report carries the same flag.
pub fn warped_lp_sobolev(
    m: &WarpedImmersion,
    e: &Subspace,
    u: &TestFunction,
    p: f64,
    s_np: f64,
) -> Result<InequalityReport> {
    let n = require_dim(m)?;
    check_lengths(m, u)?;
    let nf = n as f64;
    if !(p.is_finite() && p > 1.0 && p < nf) {
        return Err(Error::ExponentRange {
            p,
            lo: 1.0,
            hi: nf,
        });
    }
    if !(s_np.is_finite() && s_np > 0.0) {
        return Err(Error::SurfaceParameter(format!(
            "Sobolev constant must be positive and finite, got {s_np}"
        )));
    }
    let jac = jacobians(m, e)?;

    let support: Vec<usize> = (0..m.len())
        .filter(|&i| u.values()[i] != 0.0 || u.tangential_gradient()[i].norm() > 0.0)
        .collect();
    let offenders: Vec<usize> = support
        .iter()
        .copied()
        .filter(|&i| jac[i] < JACOBIAN_FLOOR)
        .collect();
    if !offenders.is_empty() {
        return Err(Error::JacobianBelowFloor {
            floor: JACOBIAN_FLOOR,
            points: offenders,
        });
    }

    let critical = nf * p / (nf - p);
    let warp_power = (nf - p) / (nf - 1.0);
    let mut weighted = 0.0;
    let mut gradient = 0.0;
    let mut curvature = 0.0;
    for &i in &support {
        let vol = m.weights()[i];
        let w = m.warp(i);
        let v = u.values()[i].abs();
        weighted += vol * (w.powi(n as i32) * jac[i]).powf(1.0 / (nf - 1.0)) * v.powf(critical);
        let rhs_weight = jac[i].powf(-(p - 1.0) / (nf - 1.0)) * w.powf(warp_power);
        gradient += vol * rhs_weight * warped_gradient_norm(m, u, i).powf(p);
        curvature += vol * rhs_weight * m.curvature_norm(i).powf(p) * v.powf(p);
    }
    let lhs = s_np * weighted.powf((nf - p) / (nf * p));
    let coefficient = nf * (nf - p) / (p * (nf - 1.0));
    let rhs = gradient.powf(1.0 / p) + coefficient * curvature.powf(1.0 / p);

    let mut constants = BTreeMap::new();
    constants.insert("s_n_p".to_owned(), s_np);
    InequalityReport::new(
        "warped-lp-sobolev",
        lhs,
        rhs,
        &m.base().info,
        constants,
        vec![CURVATURE_FLAG.to_owned()],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog, sample_immersion, ParametricChart};
    use crate::inequalities::evaluators::{lp_sobolev, weighted_isoperimetric};
    use crate::warped::geometry::warped_geometry;
    use crate::warped::metric::WarpedMetric;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use std::f64::consts::PI;
    use std::sync::Arc;

    /// Disc of radius 1 in the slice `{t0} × ℝ²`, polar coordinates.
    fn slice_disc(t0: f64, res: usize) -> ParametricChart {
        ParametricChart::new(
            vec![(0.0, 1.0), (0.0, 2.0 * PI)],
            vec![res, res],
            vec![false, true],
            3,
            Arc::new(move |u: &[f64]| vec![t0, u[0] * u[1].cos(), u[0] * u[1].sin()]),
        )
        .unwrap()
    }

    fn fibre_plane() -> Subspace {
        Subspace::coordinate(2, &[0, 1]).unwrap()
    }

    #[test]
    fn unit_warp_isoperimetric_matches_the_euclidean_evaluator() {
        let chart = catalog::build("sphere-cap", &[("theta_max", 1.2)], &[40, 40]).unwrap();
        let flat = sample_immersion(&chart).unwrap();
        let warped = warped_geometry(&chart, &WarpedMetric::euclidean()).unwrap();
        // The fibre plane {0} × ℝ² corresponds to the coordinate plane
        // spanned by the last two ambient axes.
        let e_full = Subspace::coordinate(3, &[1, 2]).unwrap();
        let euclidean = weighted_isoperimetric(&flat, &e_full).unwrap();
        let report = warped_weighted_isoperimetric(&warped, &fibre_plane()).unwrap();
        assert_abs_diff_eq!(report.lhs, euclidean.lhs, epsilon = 1e-10);
        assert_abs_diff_eq!(report.rhs, euclidean.rhs, epsilon = 1e-10);
        assert_eq!(report.name, "warped-weighted-isoperimetric");
    }

    #[test]
    fn unit_warp_sobolev_matches_the_euclidean_evaluator() {
        let chart = catalog::build("sphere-cap", &[("theta_max", 1.2)], &[40, 40]).unwrap();
        let flat = sample_immersion(&chart).unwrap();
        let warped = warped_geometry(&chart, &WarpedMetric::euclidean()).unwrap();
        let u = TestFunction::chart_bump(&flat, 0.08).unwrap();
        let e_full = Subspace::coordinate(3, &[1, 2]).unwrap();
        let euclidean = lp_sobolev(&flat, &e_full, &u, 1.5, 2.0).unwrap();
        let report = warped_lp_sobolev(&warped, &fibre_plane(), &u, 1.5, 2.0).unwrap();
        assert_abs_diff_eq!(report.lhs, euclidean.lhs, epsilon = 1e-10);
        assert_abs_diff_eq!(report.rhs, euclidean.rhs, epsilon = 1e-10);
        assert_eq!(report.flags, vec![CURVATURE_FLAG.to_owned()]);
    }

    #[test]
    fn flat_disc_in_a_slice_is_the_equality_case_for_unit_warp() {
        let m = warped_geometry(&slice_disc(0.3, 96), &WarpedMetric::euclidean()).unwrap();
        let report = warped_weighted_isoperimetric(&m, &fibre_plane()).unwrap();
        assert_abs_diff_eq!(report.lhs, 2.0 * PI, epsilon = 1e-6);
        assert_abs_diff_eq!(report.rhs, 2.0 * PI, epsilon = 1e-6);
        assert!(report.relative_margin.abs() < 1e-6);
    }

    #[test]
    fn horosphere_disc_has_the_closed_form_margin() {
        // Unit disc in the t = 0 slice under w = e^t: the slice is a
        // horosphere with |H| = 1, so lhs = 2π while rhs = 2π + 2π·1.
        let m = warped_geometry(&slice_disc(0.0, 96), &WarpedMetric::hyperbolic()).unwrap();
        let report = warped_weighted_isoperimetric(&m, &fibre_plane()).unwrap();
        assert_abs_diff_eq!(report.lhs, 2.0 * PI, epsilon = 1e-4);
        assert_abs_diff_eq!(report.rhs, 4.0 * PI, epsilon = 5e-3);
        assert!(report.margin > 0.0);
        assert_abs_diff_eq!(report.margin, 2.0 * PI, epsilon = 5e-3);
    }

    #[test]
    fn vertical_translation_scales_the_two_sides_predictably() {
        // Under w = e^t, moving a slice surface up by c multiplies the lhs
        // and the boundary term by e^{nc} and the curvature term by
        // e^{(n+1)c}; n = 2 here.
        let c = 0.4;
        let low = warped_geometry(&slice_disc(0.1, 64), &WarpedMetric::hyperbolic()).unwrap();
        let high = warped_geometry(&slice_disc(0.1 + c, 64), &WarpedMetric::hyperbolic()).unwrap();
        let report_low = warped_weighted_isoperimetric(&low, &fibre_plane()).unwrap();
        let report_high = warped_weighted_isoperimetric(&high, &fibre_plane()).unwrap();

        let boundary = |m: &WarpedImmersion| -> f64 {
            m.boundary()
                .iter()
                .map(|b| b.weight * m.metric().w(b.point[0]))
                .sum()
        };
        let b_low = boundary(&low);
        let b_high = boundary(&high);
        let curv_low = report_low.rhs - b_low;
        let curv_high = report_high.rhs - b_high;

        let grow = |x: f64, k: f64| x * (k * c).exp();
        assert_abs_diff_eq!(report_high.lhs, grow(report_low.lhs, 2.0), epsilon = 1e-8 * report_high.lhs);
        assert_abs_diff_eq!(b_high, grow(b_low, 2.0), epsilon = 1e-8 * b_high);
        assert_abs_diff_eq!(curv_high, grow(curv_low, 3.0), epsilon = 1e-6 * curv_high);
        assert!(report_low.relative_margin > 0.0 && report_high.relative_margin > 0.0);
    }

    #[test]
    fn sobolev_report_stays_nonnegative_on_a_warped_graph() {
        let chart = ParametricChart::new(
            vec![(0.2, 1.2), (0.2, 1.2)],
            vec![24, 24],
            vec![false, false],
            3,
            Arc::new(|u: &[f64]| vec![0.3 * u[0].sin() * u[1].cos(), u[0], u[1]]),
        )
        .unwrap();
        let m = warped_geometry(&chart, &WarpedMetric::hyperbolic()).unwrap();
        let u = TestFunction::chart_bump(m.base(), 0.08).unwrap();
        let report = warped_lp_sobolev(&m, &fibre_plane(), &u, 1.5, 2.0).unwrap();
        assert!(report.relative_margin >= -1e-6, "margin {}", report.relative_margin);
        assert_eq!(report.name, "warped-lp-sobolev");
        assert!(report.constants.contains_key("s_n_p"));
    }

    #[test]
    fn vertical_tangent_planes_fail_the_jacobian_floor() {
        // A sheet containing the t direction projects to the fibre plane
        // with Jacobian 0, which the L^p weights cannot absorb.
        let chart = ParametricChart::new(
            vec![(0.0, 1.0), (0.0, 1.0)],
            vec![12, 12],
            vec![false, false],
            3,
            Arc::new(|u: &[f64]| vec![u[0], u[1], 0.0]),
        )
        .unwrap();
        let m = warped_geometry(&chart, &WarpedMetric::euclidean()).unwrap();
        let u = TestFunction::chart_bump(m.base(), 0.1).unwrap();
        match warped_lp_sobolev(&m, &fibre_plane(), &u, 1.5, 2.0) {
            Err(Error::JacobianBelowFloor { floor, points }) => {
                assert_eq!(floor, JACOBIAN_FLOOR);
                assert!(!points.is_empty());
            }
            other => panic!("expected Jacobian floor failure, got {other:?}"),
        }
    }

    #[test]
    fn closed_surfaces_are_rejected_by_the_isoperimetric_evaluator() {
        let chart = ParametricChart::new(
            vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
            vec![24, 24],
            vec![true, true],
            3,
            Arc::new(|u: &[f64]| {
                let (big, small) = (2.0, 0.5);
                vec![
                    (big + small * u[1].cos()) * u[0].cos(),
                    (big + small * u[1].cos()) * u[0].sin(),
                    small * u[1].sin(),
                ]
            }),
        )
        .unwrap();
        let m = warped_geometry(&chart, &WarpedMetric::euclidean()).unwrap();
        assert!(matches!(
            warped_weighted_isoperimetric(&m, &fibre_plane()),
            Err(Error::MissingBoundary)
        ));
    }

    #[test]
    fn warped_gradient_norm_shrinks_with_the_fibre_scale() {
        // On a slice at height t0 under w = e^t, fibre-tangent gradients
        // measure e^{-t0} times their Euclidean length.
        let t0 = 0.7;
        let m = warped_geometry(&slice_disc(t0, 48), &WarpedMetric::hyperbolic()).unwrap();
        let u = TestFunction::radial_bump(
            m.base(),
            &DVector::from_vec(vec![t0, 0.0, 0.0]),
            0.8,
        )
        .unwrap();
        let scale = (-t0).exp();
        for i in [0, m.len() / 2] {
            let euclidean = u.tangential_gradient()[i].norm();
            assert_abs_diff_eq!(
                warped_gradient_norm(&m, &u, i),
                euclidean * scale,
                epsilon = 1e-10 * (1.0 + euclidean)
            );
        }
    }
}
